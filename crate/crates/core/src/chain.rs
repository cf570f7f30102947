//! Representative-atom geometry, interpolation and external loads.
//!
//! A chain of `2M+2` atoms `y_{−M} < … < y_{M+1}` is coarse-grained by
//! `2N+2` representative atoms `z_j = y_{ℓ_j}`. Interval `j` (between `z_j`
//! and `z_{j+1}`) contains `ν_j` atomic spacings, all equal to
//! `r_j = (z_{j+1} − z_j)/ν_j`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::Centered;

/// Tolerance on `Σ f_j` below which a load counts as balanced.
pub const RESULTANT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("N must be positive")]
    EmptyChain,
    #[error("ν_{0} must be a positive integer")]
    NonPositiveCount(isize),
    #[error("Σν = {0} is even; conservation of mass needs Σν = 2M + 1")]
    EvenAtomCount(usize),
    #[error("invalid interface: {0}")]
    InvalidInterface(String),
    #[error("ν_{0} must be 1 within the interface band")]
    CoarsenedInterface(isize),
    #[error("positions not strictly increasing at index {0}")]
    NotIncreasing(isize),
    #[error("lattice spacing r_{index} = {value} is not positive")]
    NonPositiveStrain { index: isize, value: f64 },
    #[error("external loads have nonzero resultant {0}")]
    ResultantNonzero(f64),
}

/// Coarse-grained chain: `N` and the interval counts `ν_{−N..N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainGeometry {
    n: usize,
    m: usize,
    nu: Centered<usize>,
    /// `ℓ_j` for `j = −N..N+1`.
    ell: Centered<isize>,
}

impl ChainGeometry {
    /// Validates `ν` (length `2N+1`, positive, odd total) and derives `M` and `ℓ`.
    pub fn new(n: usize, nu: Vec<usize>) -> Result<Self, ChainError> {
        if n == 0 {
            return Err(ChainError::EmptyChain);
        }
        let expected = 2 * n + 1;
        if nu.len() != expected {
            return Err(ChainError::LengthMismatch {
                what: "nu",
                expected,
                got: nu.len(),
            });
        }
        let ni = n as isize;
        let nu = Centered::new(-ni, nu);
        if let Some((j, _)) = nu.iter().find(|(_, &v)| v == 0) {
            return Err(ChainError::NonPositiveCount(j));
        }
        let total: usize = nu.as_slice().iter().sum();
        if total.is_multiple_of(2) {
            return Err(ChainError::EvenAtomCount(total));
        }
        let m = (total - 1) / 2;
        let mut ell = Centered::zeros(-ni, ni + 1).map(|_| 0isize);
        ell[-ni] = -(m as isize);
        for j in -ni..=ni {
            ell[j + 1] = ell[j] + nu[j] as isize;
        }
        debug_assert_eq!(ell[ni + 1], m as isize + 1);
        Ok(Self { n, m, nu, ell })
    }

    /// A fully atomistic chain (`ν ≡ 1`, so `M = N`).
    pub fn atomistic(n: usize) -> Result<Self, ChainError> {
        Self::new(n, vec![1; 2 * n + 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ni(&self) -> isize {
        self.n as isize
    }

    /// Atomistic half-count: atoms are indexed `−M..=M+1`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `ν_j`, with the boundary convention `ν_j = 1` outside `−N..=N`.
    pub fn nu(&self, j: isize) -> usize {
        self.nu.get(j).copied().unwrap_or(1)
    }

    pub fn nu_values(&self) -> &Centered<usize> {
        &self.nu
    }

    /// Atomistic index of representative atom `j` (`−N ≤ j ≤ N+1`).
    pub fn ell(&self, j: isize) -> isize {
        self.ell[j]
    }

    /// Number of strain entries, `2N+1`.
    pub fn strain_len(&self) -> usize {
        2 * self.n + 1
    }

    /// Linear interpolation of atom positions between representative atoms.
    pub fn interpolate_positions(&self, z: &Centered<f64>) -> Result<Centered<f64>, ChainError> {
        self.check_positions(z)?;
        let mi = self.m as isize;
        let mut y = Centered::zeros(-mi, mi + 1);
        for j in -self.ni()..=self.ni() {
            let nu = self.nu[j];
            let nu_f = nu as f64;
            for i in 0..nu {
                let w = i as f64 / nu_f;
                y[self.ell[j] + i as isize] = (nu_f - i as f64) / nu_f * z[j] + w * z[j + 1];
            }
        }
        y[mi + 1] = z[self.ni() + 1];
        Ok(y)
    }

    /// `r_j = (z_{j+1} − z_j)/ν_j`.
    pub fn strain_from_positions(&self, z: &Centered<f64>) -> Result<Strain, ChainError> {
        self.check_positions(z)?;
        let ni = self.ni();
        Strain::new(Centered::from_fn(-ni, ni, |j| {
            (z[j + 1] - z[j]) / self.nu[j] as f64
        }))
    }

    /// Representative positions with `z_{−N} = anchor` and `z_{j+1} − z_j = ν_j r_j`.
    pub fn positions_from_strain(
        &self,
        r: &Strain,
        anchor: f64,
    ) -> Result<Centered<f64>, ChainError> {
        self.check_strain(r)?;
        let ni = self.ni();
        let mut z = Centered::zeros(-ni, ni + 1);
        z[-ni] = anchor;
        for j in -ni..=ni {
            z[j + 1] = z[j] + self.nu[j] as f64 * r[j];
        }
        Ok(z)
    }

    pub fn check_strain(&self, r: &Strain) -> Result<(), ChainError> {
        if r.n() != self.n {
            return Err(ChainError::LengthMismatch {
                what: "strain",
                expected: self.strain_len(),
                got: r.values().len(),
            });
        }
        Ok(())
    }

    fn check_positions(&self, z: &Centered<f64>) -> Result<(), ChainError> {
        let ni = self.ni();
        if z.lo() != -ni || z.hi() != ni + 1 {
            return Err(ChainError::LengthMismatch {
                what: "representative positions",
                expected: 2 * self.n + 2,
                got: z.len(),
            });
        }
        for j in -ni..=ni {
            if z[j + 1].partial_cmp(&z[j]) != Some(Ordering::Greater) {
                return Err(ChainError::NotIncreasing(j));
            }
        }
        Ok(())
    }

    /// Representative-atom loads `f_j` from atomistic dead loads `f̃_i`
    /// by hat-function weights.
    ///
    /// `f̃_i` outside `−M..=M+1` counts as zero and `ν_j` outside `−N..=N`
    /// as one. Each side is summed outward from `ℓ_j`, so mirrored inputs
    /// give exactly mirrored outputs.
    pub fn aggregate_forces(&self, f_tilde: &Centered<f64>) -> Result<Centered<f64>, ChainError> {
        let mi = self.m as isize;
        if f_tilde.lo() != -mi || f_tilde.hi() != mi + 1 {
            return Err(ChainError::LengthMismatch {
                what: "f_tilde",
                expected: 2 * self.m + 2,
                got: f_tilde.len(),
            });
        }
        let ni = self.ni();
        Ok(Centered::from_fn(-ni, ni + 1, |j| {
            let l = self.ell[j];
            let left = self.nu(j - 1);
            let right = self.nu(j);
            let side = |count: usize, dir: isize| {
                (1..=count).fold(0.0, |acc, i| {
                    let w = (count - i) as f64 / count as f64;
                    acc + w * f_tilde.at_or_default(l + dir * i as isize)
                })
            };
            f_tilde.at_or_default(l) + (side(left, -1) + side(right, 1))
        }))
    }

    /// Aggregates `f̃` and forms the external conjugate force `Φ`.
    pub fn aggregate_loads(&self, f_tilde: &Centered<f64>) -> Result<Load, ChainError> {
        let f = self.aggregate_forces(f_tilde)?;
        let mut load = Load::from_representative(self, f)?;
        load.f_tilde = Some(f_tilde.clone());
        Ok(load)
    }
}

/// A coarse-grained chain with an atomistic region `j = −K+1..=K`.
///
/// Requires `K ≥ 3`, `N ≥ K + 2` and `ν_j = 1` for `|j| ≤ K + 1`, so that
/// every special row of the interface tables is distinct and no atomistic
/// site sees a coarsened interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QcGeometry {
    chain: ChainGeometry,
    k: usize,
}

impl QcGeometry {
    pub fn new(n: usize, k: usize, nu: Vec<usize>) -> Result<Self, ChainError> {
        let chain = ChainGeometry::new(n, nu)?;
        Self::from_chain(chain, k)
    }

    pub fn from_chain(chain: ChainGeometry, k: usize) -> Result<Self, ChainError> {
        if k < 3 {
            return Err(ChainError::InvalidInterface(format!("K = {k} < 3")));
        }
        if chain.n < k + 2 {
            return Err(ChainError::InvalidInterface(format!(
                "need N ≥ K + 2, got N = {}, K = {k}",
                chain.n
            )));
        }
        let ki = k as isize;
        for j in -ki - 1..=ki + 1 {
            if chain.nu[j] != 1 {
                return Err(ChainError::CoarsenedInterface(j));
            }
        }
        Ok(Self { chain, k })
    }

    /// `ν = 1` on the interface band and `nu_continuum` everywhere else.
    pub fn with_coarsening(n: usize, k: usize, nu_continuum: usize) -> Result<Self, ChainError> {
        let ki = k as isize;
        let nu = (-(n as isize)..=n as isize)
            .map(|j| if j.abs() <= ki + 1 { 1 } else { nu_continuum })
            .collect();
        Self::new(n, k, nu)
    }

    pub fn uniform(n: usize, k: usize) -> Result<Self, ChainError> {
        Self::with_coarsening(n, k, 1)
    }

    pub fn chain(&self) -> &ChainGeometry {
        &self.chain
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ki(&self) -> isize {
        self.k as isize
    }

    pub fn n(&self) -> usize {
        self.chain.n
    }

    pub fn ni(&self) -> isize {
        self.chain.ni()
    }
}

impl std::ops::Deref for QcGeometry {
    type Target = ChainGeometry;

    fn deref(&self) -> &ChainGeometry {
        &self.chain
    }
}

/// Per-interval lattice spacings `r_{−N..N}`, all strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Centered<f64>", into = "Centered<f64>")]
pub struct Strain(Centered<f64>);

impl Strain {
    pub fn new(values: Centered<f64>) -> Result<Self, ChainError> {
        if values.is_empty() || values.lo() != -values.hi() {
            return Err(ChainError::LengthMismatch {
                what: "strain (centered −N..=N)",
                expected: 2 * values.hi().max(0) as usize + 1,
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(ChainError::NonPositiveStrain { index, value });
        }
        Ok(Self(values))
    }

    /// Strain from the `2N+1` values listed left to right.
    pub fn from_vec(values: Vec<f64>) -> Result<Self, ChainError> {
        if values.len().is_multiple_of(2) {
            return Err(ChainError::LengthMismatch {
                what: "strain",
                expected: values.len() + 1,
                got: values.len(),
            });
        }
        let n = (values.len() / 2) as isize;
        Self::new(Centered::new(-n, values))
    }

    pub fn uniform(n: usize, a: f64) -> Result<Self, ChainError> {
        let ni = n as isize;
        Self::new(Centered::from_fn(-ni, ni, |_| a))
    }

    pub fn n(&self) -> usize {
        self.0.hi() as usize
    }

    pub fn ni(&self) -> isize {
        self.0.hi()
    }

    pub fn values(&self) -> &Centered<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// `R_j = ν_j r_j`, the distance between neighboring representative atoms.
    pub fn representative_distances(&self, g: &ChainGeometry) -> Centered<f64> {
        Centered::from_fn(-self.ni(), self.ni(), |j| g.nu(j) as f64 * self.0[j])
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.0.symmetry_defect() <= tol
    }

    /// Whether every entry lies strictly inside `(lo, hi)`.
    pub fn in_box(&self, lo: f64, hi: f64) -> bool {
        self.0.as_slice().iter().all(|&r| r > lo && r < hi)
    }
}

impl std::ops::Index<isize> for Strain {
    type Output = f64;

    fn index(&self, j: isize) -> &f64 {
        &self.0[j]
    }
}

impl TryFrom<Centered<f64>> for Strain {
    type Error = ChainError;

    fn try_from(values: Centered<f64>) -> Result<Self, ChainError> {
        Self::new(values)
    }
}

impl From<Strain> for Centered<f64> {
    fn from(s: Strain) -> Self {
        s.0
    }
}

/// External dead loads at the atomistic, representative and conjugate levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    /// Atomistic forces `f̃_{−M..M+1}`, when the load was built from them.
    pub f_tilde: Option<Centered<f64>>,
    /// Representative forces `f_{−N..N+1}`.
    pub f: Centered<f64>,
    /// External conjugate force `Φ_{−N..N}` (`Φ_{±(N+1)} = 0` implicitly).
    pub phi: Centered<f64>,
}

impl Load {
    /// Forms `Φ_j = −Σ_{i ≤ j} f_i` from balanced representative forces.
    ///
    /// The left half is accumulated from the left end and the right half
    /// from the right end (`Φ_j = Σ_{i > j} f_i` under the no-resultant
    /// condition), so an exactly anti-symmetric `f` yields an exactly
    /// symmetric `Φ`.
    pub fn from_representative(g: &ChainGeometry, f: Centered<f64>) -> Result<Self, ChainError> {
        let ni = g.ni();
        if f.lo() != -ni || f.hi() != ni + 1 {
            return Err(ChainError::LengthMismatch {
                what: "representative forces",
                expected: 2 * g.n() + 2,
                got: f.len(),
            });
        }
        let resultant: f64 = f.as_slice().iter().sum();
        if resultant.abs() > RESULTANT_TOLERANCE {
            return Err(ChainError::ResultantNonzero(resultant));
        }
        let mut phi = Centered::zeros(-ni, ni);
        let mut acc = 0.0;
        for j in -ni..0 {
            acc += f[j];
            phi[j] = -acc;
        }
        let mut acc = 0.0;
        for j in (0..=ni).rev() {
            acc += f[j + 1];
            phi[j] = acc;
        }
        Ok(Self {
            f_tilde: None,
            f,
            phi,
        })
    }

    /// Load given directly by its conjugate form; `f_j = −(Φ_j − Φ_{j−1})`.
    pub fn from_conjugate(g: &ChainGeometry, phi: Centered<f64>) -> Result<Self, ChainError> {
        let ni = g.ni();
        if phi.lo() != -ni || phi.hi() != ni {
            return Err(ChainError::LengthMismatch {
                what: "phi",
                expected: g.strain_len(),
                got: phi.len(),
            });
        }
        let f = Centered::from_fn(-ni, ni + 1, |j| {
            -(phi.at_or_default(j) - phi.at_or_default(j - 1))
        });
        Ok(Self {
            f_tilde: None,
            f,
            phi,
        })
    }

    /// Tension `T` applied to the two end atoms (`−T` on the left, `+T` on the right).
    pub fn end_tension(g: &ChainGeometry, tension: f64) -> Result<Self, ChainError> {
        let mi = g.m() as isize;
        let mut f_tilde = Centered::zeros(-mi, mi + 1);
        f_tilde[-mi] = -tension;
        f_tilde[mi + 1] = tension;
        g.aggregate_loads(&f_tilde)
    }

    /// `f_j = −(Φ_j − Φ_{j−1})` recomputed from `Φ`.
    pub fn forces_from_conjugate(&self) -> Centered<f64> {
        let (lo, hi) = (self.phi.lo(), self.phi.hi());
        Centered::from_fn(lo, hi + 1, |j| {
            -(self.phi.at_or_default(j) - self.phi.at_or_default(j - 1))
        })
    }
}
