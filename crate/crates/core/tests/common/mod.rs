#![allow(dead_code)]

use qcf_core::{Centered, ChainGeometry, QcGeometry, Strain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded generator; `QCF_SEED` overrides the per-test default.
pub fn rng(default_seed: u64) -> ChaCha8Rng {
    let seed = std::env::var("QCF_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default_seed);
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bumps `ν_j` at one position by ±1 so that `Σν` is odd.
fn fix_parity(nu: &mut [usize], at: usize, nu_max: usize) {
    if nu.iter().sum::<usize>() % 2 == 0 {
        if nu[at] < nu_max {
            nu[at] += 1;
        } else {
            nu[at] -= 1;
        }
    }
}

pub fn random_chain(rng: &mut impl Rng, n_max: usize, nu_max: usize) -> ChainGeometry {
    let n = rng.gen_range(1..=n_max);
    let mut nu: Vec<usize> = (0..2 * n + 1).map(|_| rng.gen_range(1..=nu_max)).collect();
    fix_parity(&mut nu, n, nu_max);
    ChainGeometry::new(n, nu).unwrap()
}

pub fn random_qc(rng: &mut impl Rng, nu_max: usize) -> QcGeometry {
    let k = rng.gen_range(3..=5);
    let n = k + rng.gen_range(2..=6);
    let (ni, ki) = (n as isize, k as isize);
    let mut nu: Vec<usize> = (-ni..=ni)
        .map(|j| {
            if j.abs() <= ki + 1 {
                1
            } else {
                rng.gen_range(1..=nu_max)
            }
        })
        .collect();
    fix_parity(&mut nu, 2 * n, nu_max);
    QcGeometry::new(n, k, nu).unwrap()
}

pub fn random_strain(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Strain {
    Strain::from_vec((0..2 * n + 1).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

pub fn symmetric_strain(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Strain {
    let half: Vec<f64> = (0..=n).map(|_| rng.gen_range(lo..hi)).collect();
    let ni = n as isize;
    Strain::new(Centered::from_fn(-ni, ni, |j| half[j.unsigned_abs()])).unwrap()
}

pub fn symmetric_load(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Centered<f64> {
    let half: Vec<f64> = (0..=n).map(|_| rng.gen_range(lo..hi)).collect();
    let ni = n as isize;
    Centered::from_fn(-ni, ni, |j| half[j.unsigned_abs()])
}

/// Representative positions with `z_{−N} = anchor` and spacings `r`.
pub fn positions(g: &ChainGeometry, r: &Strain, anchor: f64) -> Centered<f64> {
    g.positions_from_strain(r, anchor).unwrap()
}

/// Centered-difference gradient of `e` at `x` with step `h`.
pub fn fd_gradient(x: &Centered<f64>, h: f64, e: impl Fn(&Centered<f64>) -> f64) -> Centered<f64> {
    let mut out = Centered::zeros(x.lo(), x.hi());
    let mut y = x.clone();
    for i in x.indices() {
        let step = h;
        y[i] = x[i] + step;
        let ep = e(&y);
        y[i] = x[i] - step;
        let em = e(&y);
        y[i] = x[i];
        out[i] = (ep - em) / (2.0 * step);
    }
    out
}

/// `‖a − b‖∞ ≤ tol · max(1, ‖a‖∞)`.
pub fn close(a: &Centered<f64>, b: &Centered<f64>, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol * a.max_abs().max(1.0)
}
