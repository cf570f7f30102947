//! Energies and forces of the chain models.
//!
//! Every force is assembled from closed-form expressions in the lattice
//! spacings `r`. Forces on representative atoms follow from conjugate
//! quantities by the chain rule: with `r_j = (z_{j+1} − z_j)/ν_j`,
//!
//! ```text
//! F_j = −∂E/∂z_j = ψ_j − ψ_{j−1},   ψ_j = (1/ν_j) ∂E/∂r_j,   ψ_{−N−1} = ψ_{N+1} = 0.
//! ```
//!
//! Out-of-range conventions (zero `η` terms past the chain ends, zero `φ̂`
//! at `±(N+1)`) live in [`Terms`] so the tables below can be written with
//! the indices they are usually stated with.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainError, ChainGeometry, QcGeometry, Strain};
use crate::index::Centered;
use crate::potential::PairPotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Atomistic,
    Constrained,
    Local,
    Qce,
    Qcf,
    /// Ghost-force correction `F^G = F^QCF − F^QCE`.
    Ghost,
}

impl ModelKind {
    /// Whether the forces derive from an energy.
    pub fn is_conservative(self) -> bool {
        matches!(
            self,
            ModelKind::Atomistic | ModelKind::Constrained | ModelKind::Local | ModelKind::Qce
        )
    }
}

/// Forces `F_j` on representative atoms `j = −N..=N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceVector {
    pub model: ModelKind,
    pub values: Centered<f64>,
}

impl ForceVector {
    pub fn sum(&self) -> f64 {
        self.values.as_slice().iter().sum()
    }
}

impl std::ops::Index<isize> for ForceVector {
    type Output = f64;

    fn index(&self, j: isize) -> &f64 {
        &self.values[j]
    }
}

/// Potential terms evaluated on a strain with the chain-end conventions.
pub(crate) struct Terms<'a, P: ?Sized> {
    pub p: &'a P,
    pub r: &'a Strain,
    n: isize,
}

impl<'a, P: PairPotential + ?Sized> Terms<'a, P> {
    pub fn new(p: &'a P, r: &'a Strain) -> Self {
        Self { p, r, n: r.ni() }
    }

    fn has(&self, i: isize) -> bool {
        i >= -self.n && i <= self.n
    }

    #[allow(dead_code)]
    pub fn r(&self, i: isize) -> f64 {
        self.r[i]
    }

    /// `η(r_i)`, zero outside the chain.
    pub fn eta(&self, i: isize) -> f64 {
        if self.has(i) {
            self.p.eta(self.r[i])
        } else {
            0.0
        }
    }

    /// `η(r_i + r_j)`, zero unless both spacings exist.
    pub fn eta_pair(&self, i: isize, j: isize) -> f64 {
        if self.has(i) && self.has(j) {
            self.p.eta(self.r[i] + self.r[j])
        } else {
            0.0
        }
    }

    /// `η(2r_i)`, zero outside the chain.
    pub fn eta_double(&self, i: isize) -> f64 {
        if self.has(i) {
            self.p.eta(2.0 * self.r[i])
        } else {
            0.0
        }
    }

    /// `η̂(r_i) = η(r_i) + 2η(2r_i)`, zero outside the chain.
    pub fn eta_hat(&self, i: isize) -> f64 {
        if self.has(i) {
            self.p.eta_hat(self.r[i])
        } else {
            0.0
        }
    }

    pub fn eta_prime(&self, i: isize) -> f64 {
        if self.has(i) {
            self.p.eta_prime(self.r[i])
        } else {
            0.0
        }
    }

    pub fn eta_prime_pair(&self, i: isize, j: isize) -> f64 {
        if self.has(i) && self.has(j) {
            self.p.eta_prime(self.r[i] + self.r[j])
        } else {
            0.0
        }
    }

    pub fn eta_prime_double(&self, i: isize) -> f64 {
        if self.has(i) {
            self.p.eta_prime(2.0 * self.r[i])
        } else {
            0.0
        }
    }

    pub fn phi(&self, i: isize) -> f64 {
        if self.has(i) {
            self.p.phi(self.r[i])
        } else {
            0.0
        }
    }

    pub fn phi_pair(&self, i: isize, j: isize) -> f64 {
        if self.has(i) && self.has(j) {
            self.p.phi(self.r[i] + self.r[j])
        } else {
            0.0
        }
    }

    /// `φ̂(r_i)`, zero at `i = ±(N+1)`.
    pub fn phi_hat(&self, i: isize) -> f64 {
        if self.has(i) {
            self.p.phi_hat(self.r[i])
        } else {
            0.0
        }
    }

    /// Atomistic force `[η(r_j) + η(r_j + r_{j+1})] − [η(r_{j−1}) + η(r_{j−1} + r_{j−2})]`.
    pub fn atomistic_force(&self, j: isize) -> f64 {
        (self.eta(j) + self.eta_pair(j, j + 1)) - (self.eta(j - 1) + self.eta_pair(j - 1, j - 2))
    }

    /// Local force `η̂(r_j) − η̂(r_{j−1})`.
    pub fn local_force(&self, j: isize) -> f64 {
        self.eta_hat(j) - self.eta_hat(j - 1)
    }
}

fn check(g: &ChainGeometry, r: &Strain) -> Result<(), ChainError> {
    g.check_strain(r)
}

fn forces_from_conjugate(psi: &Centered<f64>) -> Centered<f64> {
    let (lo, hi) = (psi.lo(), psi.hi());
    Centered::from_fn(lo, hi + 1, |j| {
        psi.at_or_default(j) - psi.at_or_default(j - 1)
    })
}

/// Total atomistic energy `Σ_i [φ(y_{i+1} − y_i) + φ(y_{i+2} − y_i)]`.
pub fn energy_atomistic<P: PairPotential + ?Sized>(
    p: &P,
    y: &Centered<f64>,
) -> Result<f64, ChainError> {
    check_increasing(y)?;
    let mut e = 0.0;
    for i in y.lo()..y.hi() {
        e += p.phi(y[i + 1] - y[i]);
        if let Some(&y2) = y.get(i + 2) {
            e += p.phi(y2 - y[i]);
        }
    }
    Ok(e)
}

/// Per-atom energies `E_i^a`, half of every bond touching atom `i`.
pub fn atom_energies<P: PairPotential + ?Sized>(
    p: &P,
    y: &Centered<f64>,
) -> Result<Centered<f64>, ChainError> {
    check_increasing(y)?;
    let bond = |a: isize, b: isize| match (y.get(a), y.get(b)) {
        (Some(&ya), Some(&yb)) => p.phi(yb - ya),
        _ => 0.0,
    };
    Ok(Centered::from_fn(y.lo(), y.hi(), |i| {
        0.5 * (bond(i, i + 1) + bond(i, i + 2) + bond(i - 1, i) + bond(i - 2, i))
    }))
}

fn check_increasing(y: &Centered<f64>) -> Result<(), ChainError> {
    for i in y.lo()..y.hi() {
        if y[i + 1].partial_cmp(&y[i]) != Some(Ordering::Greater) {
            return Err(ChainError::NotIncreasing(i));
        }
    }
    Ok(())
}

/// Atomistic forces on a fully atomistic chain (`ν ≡ 1`), atoms `−N..=N+1`.
pub fn force_atomistic<P: PairPotential + ?Sized>(p: &P, r: &Strain) -> ForceVector {
    let t = Terms::new(p, r);
    let n = r.ni();
    ForceVector {
        model: ModelKind::Atomistic,
        values: Centered::from_fn(-n, n + 1, |j| t.atomistic_force(j)),
    }
}

/// Interfacial energy `S(r_{j−1}, r_j) = −½φ(2r_{j−1}) + φ(r_{j−1} + r_j) − ½φ(2r_j)`.
pub fn interfacial_energy<P: PairPotential + ?Sized>(p: &P, r_prev: f64, r_next: f64) -> f64 {
    -0.5 * p.phi(2.0 * r_prev) + p.phi(r_prev + r_next) - 0.5 * p.phi(2.0 * r_next)
}

/// Constrained-atomistic energy as `Σ ν_j φ̂(r_j) + Σ S_j`.
pub fn energy_constrained<P: PairPotential + ?Sized>(
    p: &P,
    g: &ChainGeometry,
    z: &Centered<f64>,
) -> Result<f64, ChainError> {
    let r = g.strain_from_positions(z)?;
    Ok(energy_constrained_strain(p, g, &r))
}

fn energy_constrained_strain<P: PairPotential + ?Sized>(
    p: &P,
    g: &ChainGeometry,
    r: &Strain,
) -> f64 {
    let n = g.ni();
    let bulk: f64 = (-n..=n).map(|j| g.nu(j) as f64 * p.phi_hat(r[j])).sum();
    let mut surface = -0.5 * p.phi(2.0 * r[-n]) - 0.5 * p.phi(2.0 * r[n]);
    for j in -n + 1..=n {
        surface += interfacial_energy(p, r[j - 1], r[j]);
    }
    bulk + surface
}

/// Forces of the constrained-atomistic model.
pub fn force_constrained<P: PairPotential + ?Sized>(
    p: &P,
    g: &ChainGeometry,
    r: &Strain,
) -> Result<ForceVector, ChainError> {
    check(g, r)?;
    let t = Terms::new(p, r);
    let n = g.ni();
    // ∂E/∂r_j = ν_j η̂(r_j) + ∂S_j/∂r_j + ∂S_{j+1}/∂r_j
    let psi = Centered::from_fn(-n, n, |j| {
        let nu = g.nu(j) as f64;
        let de =
            nu * t.eta_hat(j) - 2.0 * t.eta_double(j) + t.eta_pair(j - 1, j) + t.eta_pair(j, j + 1);
        de / nu
    });
    Ok(ForceVector {
        model: ModelKind::Constrained,
        values: forces_from_conjugate(&psi),
    })
}

/// Local quasicontinuum energy `Σ ν_j φ̂(r_j)`.
pub fn energy_local<P: PairPotential + ?Sized>(
    p: &P,
    g: &ChainGeometry,
    r: &Strain,
) -> Result<f64, ChainError> {
    check(g, r)?;
    let n = g.ni();
    Ok((-n..=n).map(|j| g.nu(j) as f64 * p.phi_hat(r[j])).sum())
}

/// Local quasicontinuum forces, including the one-sided surface rows.
pub fn force_local<P: PairPotential + ?Sized>(
    p: &P,
    g: &ChainGeometry,
    r: &Strain,
) -> Result<ForceVector, ChainError> {
    check(g, r)?;
    let t = Terms::new(p, r);
    let n = g.ni();
    Ok(ForceVector {
        model: ModelKind::Local,
        values: Centered::from_fn(-n, n + 1, |j| t.local_force(j)),
    })
}

/// Energy-based QC energy: local per-atom energies in the continuum
/// regions and atomistic ones for `j = −K+1..=K`.
pub fn energy_qce<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<f64, ChainError> {
    check(g, r)?;
    let t = Terms::new(p, r);
    let (n, k) = (g.ni(), g.ki());
    let local =
        |j: isize| 0.5 * (t.phi_hat(j) * g.nu(j) as f64 + t.phi_hat(j - 1) * g.nu(j - 1) as f64);
    let atomistic = |j: isize| {
        0.5 * (t.phi(j) + t.phi_pair(j, j + 1) + t.phi(j - 1) + t.phi_pair(j - 1, j - 2))
    };
    let mut e = 0.0;
    for j in -n..=-k {
        e += local(j);
    }
    for j in -k + 1..=k {
        e += atomistic(j);
    }
    for j in k + 1..=n + 1 {
        e += local(j);
    }
    Ok(e)
}

/// Energy-based QC forces, row by row including the interface corrections.
pub fn force_qce<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ForceVector, ChainError> {
    check(g, r)?;
    let t = Terms::new(p, r);
    let (n, k) = (g.ni(), g.ki());
    let values = Centered::from_fn(-n, n + 1, |j| {
        if j <= -k - 2 {
            t.local_force(j)
        } else if j == -k - 1 {
            t.local_force(j) + 0.5 * t.eta_pair(-k - 1, -k)
        } else if j == -k {
            t.local_force(j) - t.eta_double(-k) + 0.5 * t.eta_pair(-k, -k + 1)
        } else if j == -k + 1 {
            t.atomistic_force(j) - t.eta_double(-k) + 0.5 * t.eta_pair(-k - 1, -k)
        } else if j == -k + 2 {
            t.atomistic_force(j) + 0.5 * t.eta_pair(-k, -k + 1)
        } else if j <= k - 2 {
            t.atomistic_force(j)
        } else if j == k - 1 {
            t.atomistic_force(j) - 0.5 * t.eta_pair(k - 1, k)
        } else if j == k {
            t.atomistic_force(j) + t.eta_double(k) - 0.5 * t.eta_pair(k, k + 1)
        } else if j == k + 1 {
            t.local_force(j) + t.eta_double(k) - 0.5 * t.eta_pair(k - 1, k)
        } else if j == k + 2 {
            t.local_force(j) - 0.5 * t.eta_pair(k, k + 1)
        } else {
            t.local_force(j)
        }
    });
    Ok(ForceVector {
        model: ModelKind::Qce,
        values,
    })
}

/// Force-based QC forces: every representative atom feels the force of its own model.
pub fn force_qcf<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ForceVector, ChainError> {
    check(g, r)?;
    let t = Terms::new(p, r);
    let (n, k) = (g.ni(), g.ki());
    let values = Centered::from_fn(-n, n + 1, |j| {
        if j <= -k || j > k {
            t.local_force(j)
        } else {
            t.atomistic_force(j)
        }
    });
    Ok(ForceVector {
        model: ModelKind::Qcf,
        values,
    })
}

/// Ghost-force correction `F^G = F^QCF − F^QCE`, row by row.
pub fn force_ghost<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ForceVector, ChainError> {
    check(g, r)?;
    let t = Terms::new(p, r);
    let (n, k) = (g.ni(), g.ki());
    let values = Centered::from_fn(-n, n + 1, |j| {
        if j == -k - 1 {
            -0.5 * t.eta_pair(-k - 1, -k)
        } else if j == -k {
            t.eta_double(-k) - 0.5 * t.eta_pair(-k, -k + 1)
        } else if j == -k + 1 {
            t.eta_double(-k) - 0.5 * t.eta_pair(-k - 1, -k)
        } else if j == -k + 2 {
            -0.5 * t.eta_pair(-k, -k + 1)
        } else if j == k - 1 {
            0.5 * t.eta_pair(k - 1, k)
        } else if j == k {
            -t.eta_double(k) + 0.5 * t.eta_pair(k, k + 1)
        } else if j == k + 1 {
            -t.eta_double(k) + 0.5 * t.eta_pair(k - 1, k)
        } else if j == k + 2 {
            0.5 * t.eta_pair(k, k + 1)
        } else {
            0.0
        }
    });
    Ok(ForceVector {
        model: ModelKind::Ghost,
        values,
    })
}

/// The mixed partials `(∂F_K/∂z_{K+1}, ∂F_{K+1}/∂z_K)` of the force-based
/// forces, `(η'(r_K), η'(r_K) + 4η'(2r_K))`. They differ by `4η'(2r_K)`,
/// so the force field is not a closed form and admits no energy.
pub fn nonconservativity_witness<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<(f64, f64), ChainError> {
    check(g, r)?;
    let rk = r[g.ki()];
    Ok((
        p.eta_prime(rk),
        p.eta_prime(rk) + 4.0 * p.eta_prime(2.0 * rk),
    ))
}
