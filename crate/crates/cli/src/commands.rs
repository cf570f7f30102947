//! Subcommand implementations, independent of argument parsing.

use qcf_core::analysis::{
    lj_contraction_region, lj_existence_region, AnalysisError, RegionSweepRow, Theorem,
};
use qcf_core::batch::{region_sweep, solve, Execution};
use qcf_core::models::{force_ghost, force_qce, force_qcf};
use qcf_core::solvers::{Method, SolveStatus, SolverError};
use qcf_core::{
    lennard_jones, ChainError, CriticalRadii, PairPotential, QcGeometry, RegionCertificate,
    SolveReport, Strain,
};
use serde::{Deserialize, Serialize};

use crate::config::Problem;
use crate::output::{csv_float, csv_opt, sig};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_REGION: i32 = 3;

pub fn exit_code_for_status(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_CONVERGED,
        SolveStatus::MaxIters | SolveStatus::JacobianSingular => EXIT_NOT_CONVERGED,
        SolveStatus::LeftRegion => EXIT_REGION,
    }
}

pub fn exit_code_for_error(err: &SolverError) -> i32 {
    match err {
        SolverError::Chain(_) | SolverError::Potential(_) | SolverError::Config(_) => EXIT_CONFIG,
        SolverError::ContinuationStalled { .. } | SolverError::InnerSolveFailed { .. } => {
            EXIT_NOT_CONVERGED
        }
        SolverError::OutsideBounds { .. } => EXIT_REGION,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialInfo {
    pub potential: String,
    pub r_tilde_1: f64,
    pub r_tilde_2: f64,
    pub a0: f64,
    pub a1: f64,
    pub eta_hat_a1: f64,
    pub half_r_tilde_2: f64,
}

pub fn potential_info() -> PotentialInfo {
    let radii = CriticalRadii::lennard_jones();
    PotentialInfo {
        potential: crate::config::LENNARD_JONES.into(),
        r_tilde_1: radii.inflection,
        r_tilde_2: radii.curvature_zero,
        a0: radii.zero_load,
        a1: radii.stability_limit,
        eta_hat_a1: lennard_jones().eta_hat(radii.stability_limit),
        half_r_tilde_2: radii.half_curvature_zero(),
    }
}

impl PotentialInfo {
    pub fn table(&self) -> String {
        let rows = [
            ("r̃₁", self.r_tilde_1),
            ("r̃₂", self.r_tilde_2),
            ("a₀", self.a0),
            ("a₁", self.a1),
            ("η̂(a₁)", self.eta_hat_a1),
            ("r̃₂/2", self.half_r_tilde_2),
        ];
        let mut out = format!("potential {}\n", self.potential);
        for (name, value) in rows {
            out.push_str(&format!("{name:<8} {}\n", sig(value, 6)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostRow {
    pub j: isize,
    pub qce: f64,
    pub ghost: f64,
    pub qcf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostTable {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub a: f64,
    pub rows: Vec<GhostRow>,
}

/// Energy-based, ghost and force-based forces at the uniform spacing `a`.
pub fn ghost_table(g: &QcGeometry, a: f64) -> Result<GhostTable, ChainError> {
    let lj = lennard_jones();
    let r = Strain::uniform(g.n(), a)?;
    let qce = force_qce(&lj, g, &r)?;
    let ghost = force_ghost(&lj, g, &r)?;
    let qcf = force_qcf(&lj, g, &r)?;
    let rows = qcf
        .values
        .indices()
        .map(|j| GhostRow {
            j,
            qce: qce[j],
            ghost: ghost[j],
            qcf: qcf[j],
        })
        .collect();
    Ok(GhostTable {
        n: g.n(),
        k: g.k(),
        a,
        rows,
    })
}

impl GhostTable {
    pub fn csv(&self) -> String {
        let mut out = String::from("j,qce,ghost,qcf\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.j,
                csv_float(row.qce),
                csv_float(row.ghost),
                csv_float(row.qcf)
            ));
        }
        out
    }
}

pub fn run(problem: &Problem, method: Method) -> Result<SolveReport, SolverError> {
    solve(
        &lennard_jones(),
        &problem.geometry,
        &problem.load.phi,
        &problem.solver,
        method,
    )
}

/// Convergence history: step, residual, ratio to the limit and box membership.
pub fn history_csv(report: &SolveReport) -> String {
    let mut out = String::from("step,residual_inf,ratio_to_limit,in_box\n");
    for h in &report.history {
        out.push_str(&format!(
            "{},{},{},{}\n",
            h.step,
            csv_float(h.residual_inf),
            csv_opt(h.ratio_to_limit),
            h.in_box.map(|b| b.to_string()).unwrap_or_default()
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub certificate: RegionCertificate,
    pub gamma: Option<f64>,
    /// `8|η'(2r_L)| / (η'(r_U) − 5|η'(2r_L)|)` on the certified box.
    pub bound: f64,
}

pub fn region(
    theorem: Theorem,
    gamma: Option<f64>,
    r_upper: Option<f64>,
) -> Result<RegionReport, RegionCommandError> {
    let certificate = match theorem {
        Theorem::Existence => {
            lj_existence_region(r_upper.ok_or(RegionCommandError::Missing("--rU"))?)?
        }
        Theorem::Contraction => {
            lj_contraction_region(
                gamma.ok_or(RegionCommandError::Missing("--gamma"))?,
                r_upper,
            )?
            .0
        }
    };
    let bound = qcf_core::analysis::contraction_bound(
        &lennard_jones(),
        certificate.r_lower,
        certificate.r_upper,
    );
    Ok(RegionReport {
        certificate,
        gamma,
        bound,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum RegionCommandError {
    #[error("{0} is required for this region")]
    Missing(&'static str),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// `steps` equally spaced upper bounds from `from` to `to` inclusive.
pub fn sweep(
    theorem: Theorem,
    gamma: f64,
    from: f64,
    to: f64,
    steps: usize,
    exec: Execution,
) -> Vec<RegionSweepRow> {
    let r_uppers: Vec<f64> = if steps <= 1 {
        vec![from]
    } else {
        (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    region_sweep(theorem, gamma, &r_uppers, exec)
}

pub fn sweep_csv(rows: &[RegionSweepRow]) -> String {
    let mut out = String::from("r_U,r_L,phi_lo,phi_hi,bound,empty\n");
    for row in rows {
        let cert = row.certificate.as_ref();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_float(row.r_upper),
            csv_opt(cert.map(|c| c.r_lower)),
            csv_opt(cert.map(|c| c.phi_lo)),
            csv_opt(cert.map(|c| c.phi_hi)),
            csv_opt(row.bound.filter(|b| b.is_finite())),
            row.empty
        ));
    }
    out
}
