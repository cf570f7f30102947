//! Conjugate forces.
//!
//! Each conjugate force is a row table over `j = −N..=N+1` whose entries are
//! short linear combinations of `η` evaluated at single, paired or doubled
//! spacings. The tables are stored as [`Term`] lists so that the same source
//! produces both the values and, in the solvers, the analytic Jacobians.
//!
//! Rows are summed in sorted order. Mirrored rows of a symmetric strain then
//! consist of the same multiset of terms and evaluate to identical floats.

use serde::{Deserialize, Serialize};

use crate::chain::{ChainError, QcGeometry, Strain};
use crate::index::Centered;
use crate::models::Terms;
use crate::potential::PairPotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConjugateKind {
    /// Left sums of the energy-based forces.
    E,
    /// Left sums of the force-based forces.
    F,
    /// Symmetric form of `F`, agreeing with it when there is no resultant.
    FHat,
    /// Nonlocal remainder `ψ̂^F − ψ̂^E`.
    GHat,
    /// Local conjugate force `η̂(r_j)`.
    Local,
}

/// A single `η` evaluation inside a row table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Term {
    /// `η(r_a)`
    Single(isize),
    /// `η(r_a + r_b)`
    Pair(isize, isize),
    /// `η(2r_a)`
    Double(isize),
    /// `η(r_a + r_b) − η(r_c + r_d)`, evaluated as one number.
    PairDiff(isize, isize, isize, isize),
    /// Interface bracket `B_k = 2η(2r_k) − η(r_k + r_{k∓1}) − η(r_k + r_{k±1})`.
    Bracket(isize),
    /// `B_{−k} − B_k`, evaluated as one number.
    BracketGap(isize),
}

/// Evaluates `B_k`, taking the inner neighbour first so mirrored brackets
/// of a symmetric strain are bitwise equal.
fn bracket_value<P: PairPotential + ?Sized>(t: &Terms<'_, P>, k: isize) -> f64 {
    let s = k.signum();
    2.0 * t.eta_double(k) - t.eta_pair(k, k - s) - t.eta_pair(k, k + s)
}

fn bracket_derivative<P: PairPotential + ?Sized>(
    t: &Terms<'_, P>,
    k: isize,
    c: f64,
    add: &mut impl FnMut(isize, f64),
) {
    let inner = t.eta_prime_pair(k, k - 1);
    let outer = t.eta_prime_pair(k, k + 1);
    add(k, c * (4.0 * t.eta_prime_double(k) - inner - outer));
    add(k - 1, -c * inner);
    add(k + 1, -c * outer);
}

impl Term {
    pub(crate) fn value<P: PairPotential + ?Sized>(self, t: &Terms<'_, P>) -> f64 {
        match self {
            Term::Single(a) => t.eta(a),
            Term::Pair(a, b) => t.eta_pair(a, b),
            Term::Double(a) => t.eta_double(a),
            Term::PairDiff(a, b, c, d) => t.eta_pair(a, b) - t.eta_pair(c, d),
            Term::Bracket(k) => bracket_value(t, k),
            Term::BracketGap(k) => bracket_value(t, -k) - bracket_value(t, k),
        }
    }

    /// Calls `add(column, ∂/∂r_column)` for each spacing the term depends on.
    pub(crate) fn derivative<P: PairPotential + ?Sized>(
        self,
        t: &Terms<'_, P>,
        add: &mut impl FnMut(isize, f64),
    ) {
        match self {
            Term::Single(a) => add(a, t.eta_prime(a)),
            Term::Pair(a, b) => {
                let d = t.eta_prime_pair(a, b);
                add(a, d);
                add(b, d);
            }
            Term::Double(a) => add(a, 2.0 * t.eta_prime_double(a)),
            Term::PairDiff(a, b, c, d) => {
                let p = t.eta_prime_pair(a, b);
                let q = t.eta_prime_pair(c, d);
                add(a, p);
                add(b, p);
                add(c, -q);
                add(d, -q);
            }
            Term::Bracket(k) => bracket_derivative(t, k, 1.0, add),
            Term::BracketGap(k) => {
                bracket_derivative(t, -k, 1.0, add);
                bracket_derivative(t, k, -1.0, add);
            }
        }
    }
}

struct Row<'e, E: FnMut(f64, Term)>(&'e mut E);

impl<E: FnMut(f64, Term)> Row<'_, E> {
    fn term(&mut self, c: f64, t: Term) -> &mut Self {
        (self.0)(c, t);
        self
    }

    /// `η̂(r_j)`
    fn hat(&mut self, j: isize) -> &mut Self {
        self.term(1.0, Term::Single(j)).term(2.0, Term::Double(j))
    }

    /// `η(r_j) + η(r_j + r_{j−1}) + η(r_j + r_{j+1})`
    fn atomistic(&mut self, j: isize) -> &mut Self {
        self.term(1.0, Term::Single(j))
            .term(1.0, Term::Pair(j, j - 1))
            .term(1.0, Term::Pair(j, j + 1))
    }

    fn bracket(&mut self, k: isize) -> &mut Self {
        self.term(1.0, Term::Bracket(k))
    }
}

/// Emits the terms of row `j` of the requested table.
pub(crate) fn row_terms(
    kind: ConjugateKind,
    g: &QcGeometry,
    j: isize,
    emit: &mut impl FnMut(f64, Term),
) {
    let (n, k) = (g.ni(), g.ki());
    let mut row = Row(emit);
    match kind {
        ConjugateKind::Local => {
            if j <= n {
                row.hat(j);
            }
        }
        ConjugateKind::E => {
            if j == n + 1 {
            } else if j <= -k - 2 || j >= k + 2 {
                row.hat(j);
            } else if j == -k - 1 {
                row.hat(j).term(0.5, Term::Pair(j, j + 1));
            } else if j == -k {
                row.term(1.0, Term::Single(j))
                    .term(0.5, Term::Pair(j, j + 1))
                    .term(0.5, Term::Pair(j, j - 1))
                    .term(1.0, Term::Double(j));
            } else if j == -k + 1 {
                row.term(1.0, Term::Single(j))
                    .term(0.5, Term::Pair(j, j - 1))
                    .term(1.0, Term::Pair(j, j + 1));
            } else if j <= k - 2 {
                row.atomistic(j);
            } else if j == k - 1 {
                row.term(1.0, Term::Single(j))
                    .term(1.0, Term::Pair(j, j - 1))
                    .term(0.5, Term::Pair(j, j + 1));
            } else if j == k {
                row.term(1.0, Term::Single(j))
                    .term(0.5, Term::Pair(j, j - 1))
                    .term(0.5, Term::Pair(j, j + 1))
                    .term(1.0, Term::Double(j));
            } else {
                row.hat(j).term(0.5, Term::Pair(j, j - 1));
            }
        }
        ConjugateKind::F => {
            if j <= -k {
                row.hat(j);
            } else if j <= k {
                row.atomistic(j).bracket(-k);
            } else if j <= n {
                row.hat(j).term(1.0, Term::BracketGap(k));
            } else {
                row.term(1.0, Term::BracketGap(k));
            }
        }
        ConjugateKind::FHat => {
            if j <= -k || (j >= k && j <= n) {
                row.hat(j);
            } else if j < k {
                row.atomistic(j).bracket(k);
            }
        }
        ConjugateKind::GHat => {
            if j == -k - 1 {
                row.term(-0.5, Term::Pair(-k, -k - 1));
            } else if j == -k {
                row.term(1.0, Term::Double(-k))
                    .term(-0.5, Term::Pair(-k, -k + 1))
                    .term(-0.5, Term::Pair(-k, -k - 1));
            } else if j == -k + 1 {
                // ½η(r_{−K+1} + r_{−K}) + B_K, arranged so that it reads as the
                // mirror of row K−1 plus a difference that vanishes for symmetric r.
                row.term(2.0, Term::Double(k))
                    .term(-0.5, Term::Pair(k, k - 1))
                    .term(-1.0, Term::Pair(k, k + 1))
                    .term(0.5, Term::PairDiff(-k + 1, -k, k, k - 1));
            } else if j > -k + 1 && j <= k - 2 {
                row.bracket(k);
            } else if j == k - 1 {
                row.term(2.0, Term::Double(k))
                    .term(-0.5, Term::Pair(k, k - 1))
                    .term(-1.0, Term::Pair(k, k + 1));
            } else if j == k {
                row.term(1.0, Term::Double(k))
                    .term(-0.5, Term::Pair(k, k - 1))
                    .term(-0.5, Term::Pair(k, k + 1));
            } else if j == k + 1 {
                row.term(-0.5, Term::Pair(k, k + 1));
            }
        }
    }
}

/// Conjugate force values `ψ_j` for `j = −N..=N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateForce {
    pub kind: ConjugateKind,
    /// `ψ_{−N..N+1}`; `ψ_{N+1}` is the resultant for `F` and zero otherwise.
    pub values: Centered<f64>,
}

impl ConjugateForce {
    /// The unknown-carrying part `ψ_{−N..N}`.
    pub fn interior(&self) -> Centered<f64> {
        let lo = self.values.lo();
        Centered::from_fn(lo, -lo, |j| self.values[j])
    }

    /// `ψ_{N+1}`.
    pub fn end_value(&self) -> f64 {
        self.values[self.values.hi()]
    }

    /// Forces `ψ_j − ψ_{j−1}` with `ψ_{−N−1} = 0`.
    pub fn differences(&self) -> Centered<f64> {
        let v = &self.values;
        Centered::from_fn(v.lo(), v.hi(), |j| v[j] - v.at_or_default(j - 1))
    }
}

impl std::ops::Index<isize> for ConjugateForce {
    type Output = f64;

    fn index(&self, j: isize) -> &f64 {
        &self.values[j]
    }
}

/// Evaluates one row, summing the terms in sorted order.
pub(crate) fn row_value<P: PairPotential + ?Sized>(
    kind: ConjugateKind,
    g: &QcGeometry,
    t: &Terms<'_, P>,
    j: isize,
    buf: &mut Vec<f64>,
) -> f64 {
    buf.clear();
    row_terms(kind, g, j, &mut |c, term| buf.push(c * term.value(t)));
    buf.sort_by(f64::total_cmp);
    buf.iter().sum()
}

/// Evaluates a conjugate force table.
pub fn conjugate<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
    kind: ConjugateKind,
) -> Result<ConjugateForce, ChainError> {
    g.check_strain(r)?;
    let t = Terms::new(p, r);
    let n = g.ni();
    let mut buf = Vec::with_capacity(16);
    Ok(ConjugateForce {
        kind,
        values: Centered::from_fn(-n, n + 1, |j| row_value(kind, g, &t, j, &mut buf)),
    })
}

pub fn psi_e<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ConjugateForce, ChainError> {
    conjugate(p, g, r, ConjugateKind::E)
}

pub fn psi_f<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ConjugateForce, ChainError> {
    conjugate(p, g, r, ConjugateKind::F)
}

pub fn psi_f_hat<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ConjugateForce, ChainError> {
    conjugate(p, g, r, ConjugateKind::FHat)
}

pub fn psi_g_hat<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ConjugateForce, ChainError> {
    conjugate(p, g, r, ConjugateKind::GHat)
}

pub fn psi_local<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<ConjugateForce, ChainError> {
    conjugate(p, g, r, ConjugateKind::Local)
}

/// Net force-based force `Σ_j F^QCF_j = ψ^F_{N+1}`, the left interface
/// bracket minus the right one.
pub fn check_no_resultant<P: PairPotential + ?Sized>(
    p: &P,
    g: &QcGeometry,
    r: &Strain,
) -> Result<f64, ChainError> {
    g.check_strain(r)?;
    let t = Terms::new(p, r);
    let mut buf = Vec::with_capacity(8);
    Ok(row_value(ConjugateKind::F, g, &t, g.ni() + 1, &mut buf))
}
