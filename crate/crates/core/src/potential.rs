//! Pair potentials and the critical radii that parameterize the analysis.
//!
//! A chain interacts through a two-body potential `φ(r)` applied to nearest
//! and next-nearest neighbors. The solvers only ever need `φ` and its first
//! three derivatives,
//!
//! ```text
//! η(r) = φ'(r),   η'(r) = φ''(r),   η''(r) = φ'''(r),
//! ```
//!
//! together with the uniform-chain energy density `φ̂(r) = φ(r) + φ(2r)` and
//! its derivatives `η̂(r) = η(r) + 2η(2r)`, `η̂'(r) = η'(r) + 4η'(2r)`.
//!
//! Four radii summarize the qualitative shape of a potential:
//!
//! | radius | defining equation | meaning |
//! |--------|-------------------|---------|
//! | `r̃₁`   | `η'(r̃₁) = 0`      | inflection of `φ` |
//! | `r̃₂`   | `η''(r̃₂) = 0`     | minimum of the stiffness `η'` |
//! | `a₀`   | `η̂(a₀) = 0`       | zero-load lattice spacing |
//! | `a₁`   | `η̂'(a₁) = 0`      | tensile stability limit of the local model |
//!
//! [`CriticalRadii::compute`] locates them by bracketed root-finding and
//! verifies the sign and ordering assumptions the existence and contraction
//! results rely on. Construction fails rather than returning radii for a
//! potential the analysis does not cover.

use thiserror::Error;

/// Lower end of the interval on which the sign assumptions are sampled.
pub const ASSUMPTION_SAMPLE_MIN: f64 = 0.3;
/// Upper end of the interval on which the sign assumptions are sampled.
pub const ASSUMPTION_SAMPLE_MAX: f64 = 3.0;
/// Absolute tolerance on the location of every critical radius.
pub const ROOT_TOLERANCE: f64 = 1e-12;

const SAMPLES_PER_INTERVAL: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("separation {0} is not positive")]
    Domain(f64),
    #[error("{what}: no sign change on [{lo}, {hi}]")]
    NoBracket {
        what: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("ordering assumption violated: {0}")]
    OrderingViolated(String),
    #[error("sign assumption {assumption} violated at r = {at}")]
    AssumptionViolated { assumption: &'static str, at: f64 },
}

/// A two-body interaction `φ(r)` with its first three derivatives.
///
/// Implementations may assume `r > 0`; callers validate separations before
/// evaluating (see [`eta_hat_at`] for a checked entry point).
pub trait PairPotential: Send + Sync {
    fn phi(&self, r: f64) -> f64;
    /// `η(r) = φ'(r)`
    fn eta(&self, r: f64) -> f64;
    /// `η'(r) = φ''(r)`
    fn eta_prime(&self, r: f64) -> f64;
    /// `η''(r) = φ'''(r)`
    fn eta_second(&self, r: f64) -> f64;

    /// Energy per atom of an infinite uniform chain with spacing `r`.
    fn phi_hat(&self, r: f64) -> f64 {
        self.phi(r) + self.phi(2.0 * r)
    }

    fn eta_hat(&self, r: f64) -> f64 {
        self.eta(r) + 2.0 * self.eta(2.0 * r)
    }

    fn eta_hat_prime(&self, r: f64) -> f64 {
        self.eta_prime(r) + 4.0 * self.eta_prime(2.0 * r)
    }
}

impl<P: PairPotential + ?Sized> PairPotential for &P {
    fn phi(&self, r: f64) -> f64 {
        (**self).phi(r)
    }
    fn eta(&self, r: f64) -> f64 {
        (**self).eta(r)
    }
    fn eta_prime(&self, r: f64) -> f64 {
        (**self).eta_prime(r)
    }
    fn eta_second(&self, r: f64) -> f64 {
        (**self).eta_second(r)
    }
}

/// Normalized Lennard-Jones potential `φ(r) = r⁻¹² − 2r⁻⁶` (well depth 1 at `r = 1`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LennardJones;

/// The normalized Lennard-Jones potential.
pub fn lennard_jones() -> LennardJones {
    LennardJones
}

impl PairPotential for LennardJones {
    fn phi(&self, r: f64) -> f64 {
        let s6 = r.powi(-6);
        s6 * s6 - 2.0 * s6
    }

    fn eta(&self, r: f64) -> f64 {
        -12.0 * r.powi(-13) + 12.0 * r.powi(-7)
    }

    fn eta_prime(&self, r: f64) -> f64 {
        156.0 * r.powi(-14) - 84.0 * r.powi(-8)
    }

    fn eta_second(&self, r: f64) -> f64 {
        -2184.0 * r.powi(-15) + 672.0 * r.powi(-9)
    }
}

/// `η̂(r) = η(r) + 2η(2r)`, rejecting non-positive separations.
pub fn eta_hat_at<P: PairPotential + ?Sized>(p: &P, r: f64) -> Result<f64, PotentialError> {
    if r > 0.0 && r.is_finite() {
        Ok(p.eta_hat(r))
    } else {
        Err(PotentialError::Domain(r))
    }
}

/// Root of `f` on `[lo, hi]` to absolute tolerance `tol`.
///
/// Bisection safeguarded secant: a secant step is taken whenever it lands
/// strictly inside the current bracket, and a bisection step is forced if
/// the bracket failed to halve on the previous iteration.
pub fn bracketed_root(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    what: &'static str,
) -> Result<f64, PotentialError> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || !fa.is_finite() || !fb.is_finite() {
        return Err(PotentialError::NoBracket { what, lo, hi });
    }

    let mut width = b - a;
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let halved = (b - a) <= 0.5 * width;
        width = b - a;
        let x = if halved && secant > a && secant < b {
            secant
        } else {
            0.5 * (a + b)
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

/// Search intervals for the four critical radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiiBrackets {
    pub inflection: (f64, f64),
    pub curvature_zero: (f64, f64),
    pub zero_load: (f64, f64),
    pub stability_limit: (f64, f64),
}

impl RadiiBrackets {
    /// Brackets that contain the Lennard-Jones radii with room to spare.
    pub fn lennard_jones() -> Self {
        Self {
            inflection: (0.9, 1.3),
            curvature_zero: (1.0, 1.5),
            zero_load: (0.9, 1.3),
            stability_limit: (0.9, 1.3),
        }
    }
}

impl Default for RadiiBrackets {
    fn default() -> Self {
        Self::lennard_jones()
    }
}

/// The radii `r̃₁`, `r̃₂`, `a₀`, `a₁` of a potential satisfying the standing assumptions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalRadii {
    /// `r̃₁`: zero of `η'`.
    pub inflection: f64,
    /// `r̃₂`: zero of `η''`.
    pub curvature_zero: f64,
    /// `a₀`: zero of `η̂`.
    pub zero_load: f64,
    /// `a₁`: zero of `η̂'`.
    pub stability_limit: f64,
}

impl CriticalRadii {
    /// Locates the radii and checks every sign and ordering assumption.
    pub fn compute<P: PairPotential + ?Sized>(
        p: &P,
        brackets: RadiiBrackets,
    ) -> Result<Self, PotentialError> {
        let (lo, hi) = brackets.inflection;
        let inflection = bracketed_root(|r| p.eta_prime(r), lo, hi, ROOT_TOLERANCE, "r̃₁ (η' = 0)")?;
        let (lo, hi) = brackets.curvature_zero;
        let curvature_zero =
            bracketed_root(|r| p.eta_second(r), lo, hi, ROOT_TOLERANCE, "r̃₂ (η'' = 0)")?;
        let (lo, hi) = brackets.zero_load;
        let zero_load = bracketed_root(|r| p.eta_hat(r), lo, hi, ROOT_TOLERANCE, "a₀ (η̂ = 0)")?;
        let (lo, hi) = brackets.stability_limit;
        let stability_limit = bracketed_root(
            |r| p.eta_hat_prime(r),
            lo,
            hi,
            ROOT_TOLERANCE,
            "a₁ (η̂' = 0)",
        )?;

        let radii = Self {
            inflection,
            curvature_zero,
            zero_load,
            stability_limit,
        };
        radii.check_ordering()?;
        radii.check_signs(p, ASSUMPTION_SAMPLE_MIN, ASSUMPTION_SAMPLE_MAX)?;
        Ok(radii)
    }

    /// Radii of the normalized Lennard-Jones potential.
    pub fn lennard_jones() -> Self {
        Self::compute(&LennardJones, RadiiBrackets::lennard_jones())
            .expect("Lennard-Jones satisfies the standing assumptions")
    }

    /// `r̃₂ / 2`, the lower limit for admissible box bounds.
    pub fn half_curvature_zero(&self) -> f64 {
        0.5 * self.curvature_zero
    }

    /// `0 < a₀ < r̃₁ < r̃₂ < 2a₀` and `a₀ < a₁`.
    pub fn check_ordering(&self) -> Result<(), PotentialError> {
        let Self {
            inflection: r1,
            curvature_zero: r2,
            zero_load: a0,
            stability_limit: a1,
        } = *self;
        if !(0.0 < a0 && a0 < r1 && r1 < r2 && r2 < 2.0 * a0) {
            return Err(PotentialError::OrderingViolated(format!(
                "need 0 < a₀ < r̃₁ < r̃₂ < 2a₀, got a₀={a0}, r̃₁={r1}, r̃₂={r2}"
            )));
        }
        if a0 >= a1 {
            return Err(PotentialError::OrderingViolated(format!(
                "need a₀ < a₁, got a₀={a0}, a₁={a1}"
            )));
        }
        Ok(())
    }

    /// Samples the sign assumptions on `[eps, r_max]` on either side of each radius.
    pub fn check_signs<P: PairPotential + ?Sized>(
        &self,
        p: &P,
        eps: f64,
        r_max: f64,
    ) -> Result<(), PotentialError> {
        type Check<'a> = (&'static str, f64, Box<dyn Fn(f64) -> f64 + 'a>, f64);
        // (name, root, function, sign below the root)
        let checks: [Check<'_>; 4] = [
            (
                "η' > 0 below r̃₁, < 0 above",
                self.inflection,
                Box::new(|r| p.eta_prime(r)),
                1.0,
            ),
            (
                "η'' < 0 below r̃₂, > 0 above",
                self.curvature_zero,
                Box::new(|r| p.eta_second(r)),
                -1.0,
            ),
            (
                "η̂ < 0 below a₀, > 0 above",
                self.zero_load,
                Box::new(|r| p.eta_hat(r)),
                -1.0,
            ),
            (
                "η̂' > 0 below a₁, < 0 above",
                self.stability_limit,
                Box::new(|r| p.eta_hat_prime(r)),
                1.0,
            ),
        ];
        for (assumption, root, f, below) in checks.iter() {
            for (lo, hi, sign) in [(eps, *root, *below), (*root, r_max, -*below)] {
                for k in 1..=SAMPLES_PER_INTERVAL {
                    let r = lo + (hi - lo) * k as f64 / (SAMPLES_PER_INTERVAL + 1) as f64;
                    if f(r) * sign <= 0.0 {
                        return Err(PotentialError::AssumptionViolated { assumption, at: r });
                    }
                }
            }
        }
        Ok(())
    }
}
