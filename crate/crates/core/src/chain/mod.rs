//! Spin-1/2 chains over a bit-encoded computational basis.
//!
//! Site `i` maps to bit `i`; a set bit is spin up with `σz = +1`.

mod basis;
mod hamiltonian;
mod operator;

use thiserror::Error;

pub use basis::{magnetization, sigma_z, SpinBasis, MAX_DENSE_SITES, MAX_SPARSE_SITES};
pub use hamiltonian::{assemble, build_hamiltonian, build_potential, Bond, Boundary, ChainSpec, DEFAULT_PIN};
pub use operator::SparseOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("n_sites = {0} outside the supported range [{min}, {max}]", min = 1, max = MAX_SPARSE_SITES)]
    SiteCount(usize),
    #[error("chain needs at least 2 sites, got {0}")]
    TooShort(usize),
    #[error("pin_site {pin_site} out of range for {n_sites} sites")]
    PinSite { pin_site: usize, n_sites: usize },
    #[error("sector Σσz = {sector} is empty for {n_sites} sites")]
    EmptySector { sector: i32, n_sites: usize },
    #[error("sector restriction requires jx = jy (got jx = {jx}, jy = {jy})")]
    SectorNeedsXxSymmetry { jx: f64, jy: f64 },
    #[error("basis has {basis} sites but the chain has {chain}")]
    BasisMismatch { basis: usize, chain: usize },
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
}
