//! Independent solves and region evaluations run as a batch.
//!
//! With the `parallel` feature (on by default) batches are spread over the
//! rayon thread pool; without it, or with [`Execution::Sequential`], they run
//! in order on the calling thread. Results are returned in input order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::analysis::{lj_region_row, RegionSweepRow, Theorem};
use crate::chain::{QcGeometry, Strain};
use crate::index::Centered;
use crate::potential::PairPotential;
use crate::solvers::{
    ghost_force_iteration, homotopy_solve, newton_solve, Method, SolveReport, SolverConfig,
    SolverError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential execution when built without `parallel`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Applies `f` to every item, preserving order.
pub fn map<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Runs the chosen solver.
pub fn solve<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    phi: &Centered<f64>,
    cfg: &SolverConfig,
    method: Method,
) -> Result<SolveReport, SolverError> {
    match method {
        Method::Newton => newton_solve(p, g, phi, cfg),
        Method::Homotopy => homotopy_solve(p, g, phi, cfg),
        Method::GhostForceIteration => ghost_force_iteration(p, g, phi, cfg),
    }
}

/// One solve per load.
pub fn solve_batch<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    loads: &[Centered<f64>],
    cfg: &SolverConfig,
    method: Method,
    exec: Execution,
) -> Vec<Result<SolveReport, SolverError>> {
    map(loads, exec, |phi| solve(p, g, phi, cfg, method))
}

/// Newton from each starting strain for the same load.
pub fn multi_start<P: PairPotential>(
    p: &P,
    g: &QcGeometry,
    phi: &Centered<f64>,
    starts: &[Strain],
    cfg: &SolverConfig,
    exec: Execution,
) -> Vec<Result<SolveReport, SolverError>> {
    map(starts, exec, |r0| {
        let cfg = SolverConfig {
            initial_strain: Some(r0.clone()),
            ..cfg.clone()
        };
        newton_solve(p, g, phi, &cfg)
    })
}

/// Lennard-Jones regions over a list of upper bounds `r_U`.
pub fn region_sweep(
    theorem: Theorem,
    gamma: f64,
    r_uppers: &[f64],
    exec: Execution,
) -> Vec<RegionSweepRow> {
    map(r_uppers, exec, |&r_u| lj_region_row(theorem, gamma, r_u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::lennard_jones;

    #[test]
    fn execution_modes_agree() {
        let lj = lennard_jones();
        let g = QcGeometry::uniform(6, 3).unwrap();
        let loads: Vec<_> = (0..6)
            .map(|k| Centered::from_fn(-6, 6, |_| 0.3 * k as f64 - 0.6))
            .collect();
        let cfg = SolverConfig::default();
        let a = solve_batch(&lj, &g, &loads, &cfg, Method::Newton, Execution::Sequential);
        let b = solve_batch(&lj, &g, &loads, &cfg, Method::Newton, Execution::Parallel);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap().strain, y.as_ref().unwrap().strain);
        }
    }

    #[test]
    fn sweep_flags_empty_regions() {
        let rows = region_sweep(
            Theorem::Existence,
            0.5,
            &[1.0883, 1.105],
            Execution::default(),
        );
        assert!(!rows[0].empty);
        assert!(rows[1].empty);
    }
}
