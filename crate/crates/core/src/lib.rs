//! Quasicontinuum approximations of a one-dimensional atomistic chain.
//!
//! The chain carries nearest and next-nearest neighbour pair interactions.
//! Coarse-grained models replace all but a set of representative atoms by
//! linear interpolation; the force-based coupling mixes atomistic forces near
//! the middle of the chain with local continuum forces elsewhere.

pub mod analysis;
pub mod batch;
pub mod chain;
pub mod conjugate;
pub mod index;
pub mod models;
pub mod potential;
pub mod solvers;

pub use analysis::{lj_contraction_region, lj_existence_region, RegionCertificate, Theorem};
pub use chain::{ChainError, ChainGeometry, Load, QcGeometry, Strain};
pub use index::Centered;
pub use potential::{lennard_jones, CriticalRadii, LennardJones, PairPotential};
pub use solvers::{ghost_force_iteration, homotopy_solve, newton_solve, SolveReport, SolverConfig};
