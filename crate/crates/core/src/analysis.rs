//! Certified regions for existence and for contraction of the ghost-force iteration.
//!
//! A region is a box `r_L < r_j < r_U` of admissible spacings together with
//! the range `(Φ_lo, Φ_hi)` of external conjugate forces for which a
//! solution in the box is guaranteed, where
//!
//! ```text
//! Φ_lo = η(r_L) + 4η(2r_L) − 2η(2r_U),   Φ_hi = η(r_U) + 4η(2r_U) − 2η(2r_L).
//! ```

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, QcGeometry, Strain};
use crate::index::Centered;
use crate::potential::{lennard_jones, CriticalRadii, PairPotential, RadiiBrackets};
use crate::solvers::{jacobian, JacobianVariant};

/// Coefficient of `η'(2r_L)` in the existence hypothesis `η'(r_U) + 12η'(2r_L) ≥ 0`.
pub const EXISTENCE_COEFFICIENT: f64 = 12.0;
/// Coefficient of `η'(2r_L)` in the contraction hypothesis `η'(r_U) + 13η'(2r_L) > 0`.
pub const CONTRACTION_COEFFICIENT: f64 = 13.0;
/// Weight of `|η'(2r_L)|` subtracted in the denominator of the contraction bound.
pub const BOUND_DENOMINATOR_COEFFICIENT: f64 = 5.0;
/// Weight of `|η'(2r_L)|` in the numerator of the contraction bound.
pub const BOUND_NUMERATOR_COEFFICIENT: f64 = 8.0;
/// Lennard-Jones majorant `|η'(2r)| ≤ LJ_TAIL_COEFFICIENT · r^{−8}`, i.e. `84/2⁸`.
pub const LJ_TAIL_COEFFICIENT: f64 = 84.0 / 256.0;

const SCAN_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("empty region: r_L = {r_lower} is not below r_U = {r_upper}")]
    EmptyRegion { r_lower: f64, r_upper: f64 },
    #[error("{what} = {value} outside its admissible range ({lo}, {hi})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Existence and uniqueness of a solution in the box (12-condition).
    Existence,
    /// Contraction of the ghost-force iteration in the box (13-condition).
    Contraction,
}

impl Theorem {
    pub fn coefficient(self) -> f64 {
        match self {
            Theorem::Existence => EXISTENCE_COEFFICIENT,
            Theorem::Contraction => CONTRACTION_COEFFICIENT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCertificate {
    pub theorem: Theorem,
    pub r_lower: f64,
    pub r_upper: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
    /// `c = min(−Φ_lo, Φ_hi)`: every symmetric range `(−c, c)` is admissible.
    pub symmetric_half_width: f64,
    /// `η'(r_U) + C η'(2r_L)` with `C` the theorem coefficient, exact `η'`.
    pub margin: f64,
}

impl RegionCertificate {
    /// Load bounds and hypothesis margin of the box `(r_lower, r_upper)`.
    pub fn new<P: PairPotential + ?Sized>(
        p: &P,
        theorem: Theorem,
        r_lower: f64,
        r_upper: f64,
    ) -> Self {
        let (phi_lo, phi_hi) = load_bounds(p, r_lower, r_upper);
        Self {
            theorem,
            r_lower,
            r_upper,
            phi_lo,
            phi_hi,
            symmetric_half_width: (-phi_lo).min(phi_hi),
            margin: p.eta_prime(r_upper) + theorem.coefficient() * p.eta_prime(2.0 * r_lower),
        }
    }

    /// Whether every spacing lies strictly inside the box.
    pub fn contains_strain(&self, r: &Strain) -> bool {
        r.as_slice()
            .iter()
            .all(|&x| x > self.r_lower && x < self.r_upper)
    }

    /// Whether every load component lies strictly inside `(Φ_lo, Φ_hi)`.
    pub fn admits_load(&self, phi: &Centered<f64>) -> bool {
        phi.as_slice()
            .iter()
            .all(|&v| v > self.phi_lo && v < self.phi_hi)
    }
}

/// `(Φ_lo, Φ_hi)` for the box `(r_L, r_U)`.
pub fn load_bounds<P: PairPotential + ?Sized>(p: &P, r_lower: f64, r_upper: f64) -> (f64, f64) {
    let lo = p.eta(r_lower) + 4.0 * p.eta(2.0 * r_lower) - 2.0 * p.eta(2.0 * r_upper);
    let hi = p.eta(r_upper) + 4.0 * p.eta(2.0 * r_upper) - 2.0 * p.eta(2.0 * r_lower);
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionEstimate {
    /// `8|η'(2r_L)| / (η'(r_U) − 5|η'(2r_L)|)`; infinite when the denominator is not positive.
    pub bound: f64,
    pub gamma: Option<f64>,
}

/// Theoretical contraction constant of the ghost-force iteration on the box.
pub fn contraction_bound<P: PairPotential + ?Sized>(p: &P, r_lower: f64, r_upper: f64) -> f64 {
    let tail = p.eta_prime(2.0 * r_lower).abs();
    let denominator = p.eta_prime(r_upper) - BOUND_DENOMINATOR_COEFFICIENT * tail;
    if denominator > 0.0 {
        BOUND_NUMERATOR_COEFFICIENT * tail / denominator
    } else {
        f64::INFINITY
    }
}

/// `min_i (A_ii − Σ_{j≠i} |A_ij|)` for the Jacobian of the chosen conjugate force.
pub fn diag_dominance_margin<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    variant: JacobianVariant,
) -> Result<f64, ChainError> {
    let a = jacobian(p, g, r, variant)?;
    Ok((0..a.nrows())
        .map(|i| {
            let off: f64 = (0..a.ncols())
                .filter(|&j| j != i)
                .map(|j| a[(i, j)].abs())
                .sum();
            a[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min))
}

fn check_upper(radii: &CriticalRadii, r_upper: f64) -> Result<(), AnalysisError> {
    let lo = radii.half_curvature_zero();
    let hi = radii.stability_limit;
    if !(r_upper > lo && r_upper < hi) {
        return Err(AnalysisError::OutOfRange {
            what: "r_U",
            value: r_upper,
            lo,
            hi,
        });
    }
    Ok(())
}

fn certify<P: PairPotential + ?Sized>(
    p: &P,
    theorem: Theorem,
    r_lower: f64,
    r_upper: f64,
) -> Result<RegionCertificate, AnalysisError> {
    let cert = RegionCertificate::new(p, theorem, r_lower, r_upper);
    if r_lower.partial_cmp(&r_upper) != Some(Ordering::Less)
        || cert.phi_lo.partial_cmp(&cert.phi_hi) != Some(Ordering::Less)
    {
        return Err(AnalysisError::EmptyRegion { r_lower, r_upper });
    }
    Ok(cert)
}

/// Lower box bound `max(r̃₂/2, (C·84/2⁸ / η'(r_U))^{1/8})` for the Lennard-Jones potential.
fn lj_lower_bound(radii: &CriticalRadii, weight: f64, r_upper: f64) -> f64 {
    let lj = lennard_jones();
    let formula = (weight * LJ_TAIL_COEFFICIENT / lj.eta_prime(r_upper)).powf(0.125);
    radii.half_curvature_zero().max(formula)
}

/// Existence region of the Lennard-Jones chain for a given upper bound `r_U`.
pub fn lj_existence_region(r_upper: f64) -> Result<RegionCertificate, AnalysisError> {
    let radii = CriticalRadii::lennard_jones();
    check_upper(&radii, r_upper)?;
    let r_lower = lj_lower_bound(&radii, EXISTENCE_COEFFICIENT, r_upper);
    certify(&lennard_jones(), Theorem::Existence, r_lower, r_upper)
}

fn contraction_weight(gamma: f64) -> f64 {
    BOUND_DENOMINATOR_COEFFICIENT + BOUND_NUMERATOR_COEFFICIENT / gamma
}

fn lj_contraction_at(
    radii: &CriticalRadii,
    gamma: f64,
    r_upper: f64,
) -> Result<(RegionCertificate, ContractionEstimate), AnalysisError> {
    check_upper(radii, r_upper)?;
    let lj = lennard_jones();
    let r_lower = lj_lower_bound(radii, contraction_weight(gamma), r_upper);
    let cert = certify(&lj, Theorem::Contraction, r_lower, r_upper)?;
    let estimate = ContractionEstimate {
        bound: contraction_bound(&lj, r_lower, r_upper),
        gamma: Some(gamma),
    };
    Ok((cert, estimate))
}

/// Lennard-Jones box on which the ghost-force iteration contracts with
/// constant at most `γ`.
///
/// With `r_upper = None` the upper bound is chosen to maximize the
/// symmetric load half-width `c`: a grid scan followed by golden-section
/// refinement around the best grid point.
pub fn lj_contraction_region(
    gamma: f64,
    r_upper: Option<f64>,
) -> Result<(RegionCertificate, ContractionEstimate), AnalysisError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(AnalysisError::OutOfRange {
            what: "gamma",
            value: gamma,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let radii = CriticalRadii::lennard_jones();
    if let Some(r_upper) = r_upper {
        return lj_contraction_at(&radii, gamma, r_upper);
    }

    let lo = radii.half_curvature_zero();
    let hi = radii.stability_limit;
    let h = (hi - lo) / SCAN_POINTS as f64;
    let width = |r_u: f64| {
        lj_contraction_at(&radii, gamma, r_u)
            .map(|(c, _)| c.symmetric_half_width)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (best, best_width) = (1..SCAN_POINTS)
        .map(|k| lo + k as f64 * h)
        .map(|r_u| (r_u, width(r_u)))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        });
    if !best_width.is_finite() {
        return Err(AnalysisError::EmptyRegion {
            r_lower: lo,
            r_upper: hi,
        });
    }
    let r_u = golden_max(
        width,
        (best - h).max(lo + 1e-12),
        (best + h).min(hi - 1e-12),
        1e-13,
    );
    lj_contraction_at(&radii, gamma, r_u)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// A region computation at one `r_U`, for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSweepRow {
    pub r_upper: f64,
    pub certificate: Option<RegionCertificate>,
    pub bound: Option<f64>,
    pub empty: bool,
}

/// Certificate of the given kind at `r_U`, with empty regions flagged rather than failing.
pub fn lj_region_row(theorem: Theorem, gamma: f64, r_upper: f64) -> RegionSweepRow {
    let lj = lennard_jones();
    let result = match theorem {
        Theorem::Existence => lj_existence_region(r_upper),
        Theorem::Contraction => lj_contraction_region(gamma, Some(r_upper)).map(|(c, _)| c),
    };
    match result {
        Ok(cert) => RegionSweepRow {
            r_upper,
            bound: Some(contraction_bound(&lj, cert.r_lower, cert.r_upper)),
            certificate: Some(cert),
            empty: false,
        },
        Err(_) => RegionSweepRow {
            r_upper,
            certificate: None,
            bound: None,
            empty: true,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    /// Signed slack; positive (or zero for non-strict checks) when satisfied.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub checks: Vec<HypothesisCheck>,
}

impl CertificateReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_POTENTIAL: &str = "potential assumptions";
pub const CHECK_LOWER: &str = "r̃₂/2 ≤ r_L";
pub const CHECK_ORDER: &str = "r_L < r_U";
pub const CHECK_UPPER: &str = "r_U < a₁";
pub const CHECK_EXISTENCE: &str = "η'(r_U) + 12η'(2r_L) ≥ 0";
pub const CHECK_CONTRACTION: &str = "η'(r_U) + 13η'(2r_L) > 0";
pub const CHECK_LOAD_LENGTH: &str = "load matches geometry";
pub const CHECK_LOAD_BOUNDS: &str = "Φ_lo < Φ_j < Φ_hi";
pub const CHECK_LOAD_SYMMETRY: &str = "Φ symmetric";

/// Evaluates every hypothesis of the certificate's theorem for the load `Φ`.
pub fn verify_certificate<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    cert: &RegionCertificate,
    phi: &Centered<f64>,
) -> CertificateReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, margin: f64| {
        checks.push(HypothesisCheck {
            name: name.to_string(),
            passed,
            margin,
        })
    };
    let (r_l, r_u) = (cert.r_lower, cert.r_upper);
    match CriticalRadii::compute(p, RadiiBrackets::default()) {
        Ok(radii) => {
            push(CHECK_POTENTIAL, true, 0.0);
            let m = r_l - radii.half_curvature_zero();
            push(CHECK_LOWER, m >= 0.0, m);
            let m = radii.stability_limit - r_u;
            push(CHECK_UPPER, m > 0.0, m);
        }
        Err(_) => push(CHECK_POTENTIAL, false, f64::NAN),
    }
    push(CHECK_ORDER, r_u > r_l, r_u - r_l);
    let m = p.eta_prime(r_u) + EXISTENCE_COEFFICIENT * p.eta_prime(2.0 * r_l);
    push(CHECK_EXISTENCE, m >= 0.0, m);
    if cert.theorem == Theorem::Contraction {
        let m = p.eta_prime(r_u) + CONTRACTION_COEFFICIENT * p.eta_prime(2.0 * r_l);
        push(CHECK_CONTRACTION, m > 0.0, m);
    }
    let length_ok = phi.lo() == -g.ni() && phi.hi() == g.ni();
    push(CHECK_LOAD_LENGTH, length_ok, 0.0);
    let (phi_lo, phi_hi) = load_bounds(p, r_l, r_u);
    let m = phi
        .as_slice()
        .iter()
        .map(|&v| (v - phi_lo).min(phi_hi - v))
        .fold(f64::INFINITY, f64::min);
    push(CHECK_LOAD_BOUNDS, m > 0.0, m);
    let defect = phi.symmetry_defect();
    push(CHECK_LOAD_SYMMETRY, defect <= 1e-12, -defect);
    CertificateReport { checks }
}
