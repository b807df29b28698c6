//! Sudden-quench work statistics for zero-temperature quantum critical models.
//!
//! The crate is organised around the two-point-measurement work distribution
//! of a system prepared in the ground state of `H(λi)` and suddenly quenched to
//! `H(λf)`:
//!
//! - [`lz`]: closed-form Landau–Zener two-level quantities.
//! - [`chain`]: spin-1/2 XYZ chains over a bit-encoded basis, with optional
//!   total-magnetization sectors.
//! - [`eigen`]: dense and Lanczos ground-state/spectrum solvers.
//! - [`free_fermion`]: Jordan–Wigner solution of the XX chain in a field.
//! - [`work`]: work distributions, moments and the second-order check.
//! - [`sweep`]: phase-diagram sweeps, jump detection and CSV persistence.
//! - [`verify`]: the built-in verification suites used by the CLI.

pub mod chain;
pub mod eigen;
pub mod free_fermion;
pub mod lz;
pub mod sweep;
pub mod verify;
pub mod work;

pub use chain::{Boundary, ChainSpec, SparseOperator, SpinBasis};
pub use eigen::{EigenResult, LanczosOptions};
pub use lz::LzParams;
pub use work::{QuenchParam, QuenchSpec, WorkDistribution, WorkMoments};
