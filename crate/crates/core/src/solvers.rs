//! Solvers for the force-based equilibrium system `ψ̂^F(r) = Φ`.
//!
//! Three routes are provided: damped Newton, homotopy continuation from the
//! decoupled local system, and the ghost-force iteration
//! `ψ̂^E(r^{n+1}) = Φ − ψ̂^G(r^n)`. All linear algebra is dense LU.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::RegionCertificate;
use crate::chain::{ChainError, Load, QcGeometry, Strain};
use crate::conjugate::{conjugate, row_terms, ConjugateKind};
use crate::index::Centered;
use crate::models::{force_qcf, Terms};
use crate::potential::{
    bracketed_root, CriticalRadii, PairPotential, PotentialError, RadiiBrackets,
};

/// LU pivots below this magnitude mark the Jacobian as singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;
/// Maximum number of step halvings in the Newton line search.
pub const MAX_HALVINGS: usize = 30;
/// Smallest homotopy step, `2^{−10}`.
pub const MIN_HOMOTOPY_STEP: f64 = 1.0 / 1024.0;
/// Ratios to the limit are only formed when `‖r^n − r‖∞` is at least this large.
pub const RATIO_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("continuation stalled at t = {t} (step {step})")]
    ContinuationStalled { t: f64, step: f64 },
    #[error("load component {index} = {value} lies outside the certified range ({lo}, {hi})")]
    OutsideBounds {
        index: isize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("inner solve failed at outer step {step}: {status:?}")]
    InnerSolveFailed { step: usize, status: SolveStatus },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    JacobianSingular,
    LeftRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Newton,
    Homotopy,
    GhostForceIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub homotopy_steps: usize,
    pub gfi_tol: f64,
    pub max_gfi_iters: usize,
    /// Residual tolerance of the inner `ψ̂^E` solves of the ghost-force iteration.
    pub inner_tol: f64,
    /// Starting strain; uniform `a₀` when absent.
    pub initial_strain: Option<Strain>,
    /// Certified region. Supplies the strain box for `LeftRegion` checks and
    /// the load bounds the homotopy solver insists on.
    pub certificate: Option<RegionCertificate>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            max_newton_iters: 50,
            homotopy_steps: 20,
            gfi_tol: 1e-12,
            max_gfi_iters: 200,
            inner_tol: 1e-13,
            initial_strain: None,
            certificate: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("gfi_tol", self.gfi_tol),
            ("inner_tol", self.inner_tol),
        ];
        for (name, v) in positive {
            if v.partial_cmp(&0.0) != Some(Ordering::Greater) {
                return Err(SolverError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let counts = [
            ("max_newton_iters", self.max_newton_iters),
            ("homotopy_steps", self.homotopy_steps),
            ("max_gfi_iters", self.max_gfi_iters),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(SolverError::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn in_box(&self, r: &Strain) -> Option<bool> {
        self.certificate.as_ref().map(|c| c.contains_strain(r))
    }
}

/// One row of a convergence history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: usize,
    /// `‖ψ̂^F(r) − Φ‖∞` at this iterate.
    pub residual_inf: f64,
    /// `‖r^n − r^{n−1}‖∞`; zero for the starting point.
    pub step_inf: f64,
    /// `‖r^n − r‖∞ / ‖r^{n−1} − r‖∞` against the final limit.
    pub ratio_to_limit: Option<f64>,
    /// `‖r^n − r^{n−1}‖∞ / ‖r^{n−1} − r^{n−2}‖∞`.
    pub successive_ratio: Option<f64>,
    pub in_box: Option<bool>,
    /// Homotopy parameter reached at this step.
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub status: SolveStatus,
    pub strain: Strain,
    pub iterations: usize,
    pub history: Vec<HistoryEntry>,
    /// Every accepted iterate, starting point first.
    pub iterates: Vec<Strain>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.residual_inf)
    }

    pub fn ratios_to_limit(&self) -> impl Iterator<Item = f64> + '_ {
        self.history.iter().filter_map(|h| h.ratio_to_limit)
    }

    pub fn all_in_box(&self) -> Option<bool> {
        let flags: Option<Vec<bool>> = self.history.iter().map(|h| h.in_box).collect();
        flags.map(|f| f.iter().all(|&b| b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JacobianVariant {
    FHat,
    E,
    GHat,
    Local,
}

impl JacobianVariant {
    fn kind(self) -> ConjugateKind {
        match self {
            JacobianVariant::FHat => ConjugateKind::FHat,
            JacobianVariant::E => ConjugateKind::E,
            JacobianVariant::GHat => ConjugateKind::GHat,
            JacobianVariant::Local => ConjugateKind::Local,
        }
    }
}

/// Dense `(2N+1) × (2N+1)` matrix of `∂ψ_i/∂r_j`, rows and columns ordered `−N..=N`.
pub fn jacobian<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    variant: JacobianVariant,
) -> Result<DMatrix<f64>, ChainError> {
    g.check_strain(r)?;
    Ok(jacobian_unchecked(p, g, r, variant.kind()))
}

fn jacobian_unchecked<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    kind: ConjugateKind,
) -> DMatrix<f64> {
    let n = g.ni();
    let size = g.strain_len();
    let t = Terms::new(p, r);
    let mut jac = DMatrix::zeros(size, size);
    for i in -n..=n {
        let row = (i + n) as usize;
        row_terms(kind, g, i, &mut |c, term| {
            term.derivative(&t, &mut |col, d| {
                if (-n..=n).contains(&col) {
                    jac[(row, (col + n) as usize)] += c * d;
                }
            })
        });
    }
    jac
}

fn interior(
    p: &impl PairPotential,
    g: &QcGeometry,
    r: &Strain,
    kind: ConjugateKind,
) -> Centered<f64> {
    conjugate(p, g, r, kind)
        .expect("strain validated against geometry")
        .interior()
}

/// `‖ψ̂^F(r) − Φ‖∞`.
pub fn residual_inf<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    phi: &Centered<f64>,
) -> Result<f64, ChainError> {
    g.check_strain(r)?;
    Ok(interior(p, g, r, ConjugateKind::FHat).max_abs_diff(phi))
}

/// `‖F^QCF(r) + f‖∞`, the equilibrium defect in force form.
pub fn equilibrium_defect<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    load: &Load,
) -> Result<f64, ChainError> {
    let f = force_qcf(p, g, r)?;
    Ok(f.values
        .iter()
        .map(|(j, v)| (v + load.f[j]).abs())
        .fold(0.0, f64::max))
}

/// Components of the homotopy `h(r, t) = (1−t)(Ψ̂^L(r) − Φ) + t(Ψ̂^F(r) − Φ)`.
pub fn homotopy_residual<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    phi: &Centered<f64>,
    t: f64,
) -> Result<Centered<f64>, ChainError> {
    g.check_strain(r)?;
    let local = interior(p, g, r, ConjugateKind::Local);
    let full = interior(p, g, r, ConjugateKind::FHat);
    Ok(Centered::from_fn(phi.lo(), phi.hi(), |j| {
        (1.0 - t) * (local[j] - phi[j]) + t * (full[j] - phi[j])
    }))
}

fn check_phi(g: &QcGeometry, phi: &Centered<f64>) -> Result<(), SolverError> {
    if phi.lo() != -g.ni() || phi.hi() != g.ni() {
        return Err(ChainError::LengthMismatch {
            what: "phi",
            expected: g.strain_len(),
            got: phi.len(),
        }
        .into());
    }
    Ok(())
}

fn zero_load_spacing<P: PairPotential + ?Sized>(p: &P) -> Result<f64, PotentialError> {
    let (lo, hi) = RadiiBrackets::default().zero_load;
    bracketed_root(|r| p.eta_hat(r), lo, hi, 1e-15, "a₀ (η̂ = 0)")
}

fn initial_strain<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    cfg: &SolverConfig,
) -> Result<Strain, SolverError> {
    match &cfg.initial_strain {
        Some(r) => {
            g.check_strain(r)?;
            Ok(r.clone())
        }
        None => Ok(Strain::uniform(g.n(), zero_load_spacing(p)?)?),
    }
}

fn strain_like(r: &Strain, values: impl Iterator<Item = f64>) -> Option<Strain> {
    Strain::new(Centered::new(-r.ni(), values.collect())).ok()
}

struct NewtonOutcome {
    r: Strain,
    status: SolveStatus,
    residuals: Vec<f64>,
    iterates: Vec<Strain>,
}

/// Damped Newton iteration on `residual(r) = 0`.
fn newton_core(
    r0: Strain,
    residual: impl Fn(&Strain) -> Centered<f64>,
    jac: impl Fn(&Strain) -> DMatrix<f64>,
    tol: f64,
    max_iters: usize,
    stay_in: impl Fn(&Strain) -> bool,
) -> NewtonOutcome {
    let mut r = r0;
    let mut res = residual(&r);
    let mut norm = res.max_abs();
    let mut out = NewtonOutcome {
        r: r.clone(),
        status: SolveStatus::MaxIters,
        residuals: vec![norm],
        iterates: vec![r.clone()],
    };
    for _ in 0..max_iters {
        if norm <= tol {
            out.status = SolveStatus::Converged;
            break;
        }
        let lu = jac(&r).lu();
        let min_pivot = lu
            .u()
            .diagonal()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min_pivot.is_nan() || min_pivot < SINGULAR_PIVOT {
            out.status = SolveStatus::JacobianSingular;
            break;
        }
        let rhs = DVector::from_iterator(res.len(), res.as_slice().iter().map(|v| -v));
        let Some(delta) = lu.solve(&rhs) else {
            out.status = SolveStatus::JacobianSingular;
            break;
        };

        let mut lambda = 1.0;
        let mut fallback = None;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = strain_like(
                &r,
                r.as_slice()
                    .iter()
                    .zip(delta.iter())
                    .map(|(a, d)| a + lambda * d),
            );
            if let Some(trial) = trial {
                let trial_res = residual(&trial);
                let trial_norm = trial_res.max_abs();
                if trial_norm < norm {
                    accepted = Some((trial, trial_res, trial_norm));
                    break;
                }
                if fallback.is_none() {
                    fallback = Some((trial, trial_res, trial_norm));
                }
            }
            lambda *= 0.5;
        }
        let Some((next, next_res, next_norm)) = accepted.or(fallback) else {
            out.status = SolveStatus::MaxIters;
            break;
        };
        r = next;
        res = next_res;
        norm = next_norm;
        out.residuals.push(norm);
        out.iterates.push(r.clone());
        if !stay_in(&r) {
            out.status = SolveStatus::LeftRegion;
            break;
        }
    }
    if out.status == SolveStatus::MaxIters && norm <= tol {
        out.status = SolveStatus::Converged;
    }
    out.r = r;
    out
}

fn build_history(
    iterates: &[Strain],
    residuals: &[f64],
    cfg: &SolverConfig,
    limit: Option<&Strain>,
) -> Vec<HistoryEntry> {
    let diff = |a: &Strain, b: &Strain| a.values().max_abs_diff(b.values());
    let mut out = Vec::with_capacity(iterates.len());
    for (n, r) in iterates.iter().enumerate() {
        let step_inf = if n == 0 {
            0.0
        } else {
            diff(r, &iterates[n - 1])
        };
        let successive_ratio = (n >= 2)
            .then(|| {
                let prev = diff(&iterates[n - 1], &iterates[n - 2]);
                (prev > 0.0).then(|| step_inf / prev)
            })
            .flatten();
        let ratio_to_limit = match (limit, n) {
            (Some(lim), n) if n >= 1 => {
                let before = diff(&iterates[n - 1], lim);
                (before >= RATIO_FLOOR).then(|| diff(r, lim) / before)
            }
            _ => None,
        };
        out.push(HistoryEntry {
            step: n,
            residual_inf: residuals[n],
            step_inf,
            ratio_to_limit,
            successive_ratio,
            in_box: cfg.in_box(r),
            t: None,
        });
    }
    out
}

/// Damped Newton on `ψ̂^F(r) = Φ`.
pub fn newton_solve<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    phi: &Centered<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    cfg.validate()?;
    check_phi(g, phi)?;
    let r0 = initial_strain(p, g, cfg)?;
    let out = newton_core(
        r0,
        |r| residual_vec(p, g, r, phi, ConjugateKind::FHat),
        |r| jacobian_unchecked(p, g, r, ConjugateKind::FHat),
        cfg.newton_tol,
        cfg.max_newton_iters,
        |r| cfg.in_box(r).unwrap_or(true),
    );
    let history = build_history(&out.iterates, &out.residuals, cfg, None);
    Ok(SolveReport {
        method: Method::Newton,
        status: out.status,
        strain: out.r,
        iterations: out.iterates.len() - 1,
        history,
        iterates: out.iterates,
    })
}

fn residual_vec<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    rhs: &Centered<f64>,
    kind: ConjugateKind,
) -> Centered<f64> {
    let psi = interior(p, g, r, kind);
    Centered::from_fn(rhs.lo(), rhs.hi(), |j| psi[j] - rhs[j])
}

/// Continuation from the local system `η̂(r_j) = Φ_j` (t = 0) to `ψ̂^F(r) = Φ` (t = 1).
pub fn homotopy_solve<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    phi: &Centered<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    cfg.validate()?;
    check_phi(g, phi)?;
    let (lo, hi) = match &cfg.certificate {
        Some(cert) => {
            for (j, &v) in phi.iter() {
                if !(v > cert.phi_lo && v < cert.phi_hi) {
                    return Err(SolverError::OutsideBounds {
                        index: j,
                        value: v,
                        lo: cert.phi_lo,
                        hi: cert.phi_hi,
                    });
                }
            }
            (cert.r_lower, cert.r_upper)
        }
        None => {
            let radii = CriticalRadii::compute(p, RadiiBrackets::default())?;
            (
                crate::potential::ASSUMPTION_SAMPLE_MIN,
                radii.stability_limit,
            )
        }
    };

    let mut local = Vec::with_capacity(phi.len());
    for (_, &v) in phi.iter() {
        local.push(bracketed_root(
            |x| p.eta_hat(x) - v,
            lo,
            hi,
            1e-15,
            "local equation η̂(r) = Φ_j",
        )?);
    }
    let mut r = Strain::new(Centered::new(phi.lo(), local))?;

    let mut iterates = vec![r.clone()];
    let mut residuals = vec![residual_vec(p, g, &r, phi, ConjugateKind::FHat).max_abs()];
    let mut ts = vec![0.0];
    let mut t = 0.0;
    let mut dt = 1.0 / cfg.homotopy_steps as f64;
    let mut status = SolveStatus::Converged;
    while t < 1.0 {
        let target = (t + dt).min(1.0);
        let out = newton_core(
            r.clone(),
            |x| {
                let local = interior(p, g, x, ConjugateKind::Local);
                let full = interior(p, g, x, ConjugateKind::FHat);
                Centered::from_fn(phi.lo(), phi.hi(), |j| {
                    (1.0 - target) * local[j] + target * full[j] - phi[j]
                })
            },
            |x| {
                (1.0 - target) * jacobian_unchecked(p, g, x, ConjugateKind::Local)
                    + target * jacobian_unchecked(p, g, x, ConjugateKind::FHat)
            },
            cfg.newton_tol,
            cfg.max_newton_iters,
            |x| cfg.in_box(x).unwrap_or(true),
        );
        match out.status {
            SolveStatus::Converged => {
                t = target;
                r = out.r;
                residuals.push(residual_vec(p, g, &r, phi, ConjugateKind::FHat).max_abs());
                iterates.push(r.clone());
                ts.push(t);
            }
            SolveStatus::LeftRegion => {
                status = SolveStatus::LeftRegion;
                iterates.push(out.r.clone());
                residuals.push(residual_vec(p, g, &out.r, phi, ConjugateKind::FHat).max_abs());
                ts.push(target);
                r = out.r;
                break;
            }
            _ => {
                dt *= 0.5;
                if dt < MIN_HOMOTOPY_STEP {
                    return Err(SolverError::ContinuationStalled { t, step: dt });
                }
            }
        }
    }

    let mut history = build_history(&iterates, &residuals, cfg, None);
    for (h, t) in history.iter_mut().zip(ts) {
        h.t = Some(t);
    }
    Ok(SolveReport {
        method: Method::Homotopy,
        status,
        strain: r,
        iterations: iterates.len() - 1,
        history,
        iterates,
    })
}

/// Ghost-force iteration `ψ̂^E(r^{n+1}) = Φ − ψ̂^G(r^n)`.
///
/// After the outer loop stops, the last iterate is polished by Newton on
/// `ψ̂^F(r) = Φ` and the ratios `‖r^{n+1} − r‖∞ / ‖r^n − r‖∞` are measured
/// against that limit.
pub fn ghost_force_iteration<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    phi: &Centered<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    cfg.validate()?;
    check_phi(g, phi)?;
    let mut r = initial_strain(p, g, cfg)?;
    let mut iterates = vec![r.clone()];
    let mut residuals = vec![residual_vec(p, g, &r, phi, ConjugateKind::FHat).max_abs()];
    let mut status = SolveStatus::MaxIters;

    for step in 1..=cfg.max_gfi_iters {
        let ghost = interior(p, g, &r, ConjugateKind::GHat);
        let rhs = Centered::from_fn(phi.lo(), phi.hi(), |j| phi[j] - ghost[j]);
        let inner = newton_core(
            r.clone(),
            |x| residual_vec(p, g, x, &rhs, ConjugateKind::E),
            |x| jacobian_unchecked(p, g, x, ConjugateKind::E),
            cfg.inner_tol,
            cfg.max_newton_iters,
            |_| true,
        );
        if inner.status != SolveStatus::Converged {
            return Err(SolverError::InnerSolveFailed {
                step,
                status: inner.status,
            });
        }
        let change = inner.r.values().max_abs_diff(r.values());
        r = inner.r;
        residuals.push(residual_vec(p, g, &r, phi, ConjugateKind::FHat).max_abs());
        iterates.push(r.clone());
        if change <= cfg.gfi_tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    let mut strain = r.clone();
    if status == SolveStatus::Converged {
        let polish = newton_core(
            r,
            |x| residual_vec(p, g, x, phi, ConjugateKind::FHat),
            |x| jacobian_unchecked(p, g, x, ConjugateKind::FHat),
            cfg.newton_tol,
            cfg.max_newton_iters,
            |_| true,
        );
        if polish.status == SolveStatus::Converged {
            strain = polish.r;
        }
    }
    let limit = (status == SolveStatus::Converged).then_some(&strain);
    let history = build_history(&iterates, &residuals, cfg, limit);
    if status == SolveStatus::Converged && history.iter().any(|h| h.in_box == Some(false)) {
        status = SolveStatus::LeftRegion;
    }
    Ok(SolveReport {
        method: Method::GhostForceIteration,
        status,
        strain,
        iterations: iterates.len() - 1,
        history,
        iterates,
    })
}
