//! Ground-state and full-spectrum solvers for [`SparseOperator`].
//!
//! `full_spectrum` is a dense symmetric eigendecomposition (faer); `ground_state`
//! runs Lanczos with full reorthogonalization and restarts from the current
//! Ritz vector when the Krylov space fills up.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::{Mat, Par};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chain::SparseOperator;
use crate::work::dot;

pub const DEFAULT_SEED: u64 = 0x5EED;
/// Gap below which a ground state is flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Largest dimension accepted by the dense path.
pub const MAX_DENSE_DIM: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("operator has dimension zero")]
    Empty,
    #[error("dimension {dim} exceeds the dense limit {max}")]
    DimensionGuard { dim: usize, max: usize },
    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub seed: u64,
    /// Residual target `‖Hv − Ev‖ ≤ tol · max(1, |E|)`.
    pub tol: f64,
    /// Cap on matrix-vector products across all restarts.
    pub max_iter: usize,
    /// Krylov vectors kept before restarting.
    pub krylov_dim: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            tol: 1e-10,
            max_iter: 500,
            krylov_dim: 100,
        }
    }
}

/// Eigenpairs in ascending order of energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `energies[1] − energies[0]`; for Lanczos, the gap to the second Ritz value.
    pub gap: Option<f64>,
    /// Set when `gap < DEGENERACY_TOL`.
    pub degenerate: bool,
    /// Largest residual `‖Hv − Ev‖` over the checked pairs.
    pub residual: f64,
    pub iterations: usize,
}

impl EigenResult {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_vector(&self) -> &[f64] {
        &self.vectors[0]
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

fn residual_norm(op: &SparseOperator, v: &[f64], e: f64) -> f64 {
    let hv = op.apply(v);
    hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt()
}

/// Complete orthonormal eigendecomposition, ascending.
///
/// Runs single-threaded so results are bit-identical across machines with
/// different core counts.
pub fn full_spectrum(op: &SparseOperator) -> Result<EigenResult, SolverError> {
    let dim = op.dim();
    if dim == 0 {
        return Err(SolverError::Empty);
    }
    if dim > MAX_DENSE_DIM {
        return Err(SolverError::DimensionGuard {
            dim,
            max: MAX_DENSE_DIM,
        });
    }
    let mut a = Mat::<f64>::zeros(dim, dim);
    for &(r, c, v) in op.entries() {
        a[(r, c)] += v;
    }
    let mut u = Mat::<f64>::zeros(dim, dim);
    let mut s = Diag::<f64>::zeros(dim);
    let par = Par::Seq;
    let scratch = self_adjoint_evd_scratch::<f64>(dim, ComputeEigenvectors::Yes, par, Default::default());
    self_adjoint_evd(
        a.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut MemBuffer::new(scratch)),
        Default::default(),
    )
    .map_err(|_| SolverError::NotConverged {
        iterations: 0,
        residual: f64::NAN,
    })?;
    let values = s.column_vector();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let energies: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let vectors: Vec<Vec<f64>> = order.iter().map(|&k| u.col(k).iter().copied().collect()).collect();
    let gap = (dim > 1).then(|| energies[1] - energies[0]);
    let residual = residual_norm(op, &vectors[0], energies[0]);
    Ok(EigenResult {
        degenerate: gap.is_some_and(|g| g < DEGENERACY_TOL),
        energies,
        vectors,
        gap,
        residual,
        iterations: 0,
    })
}

/// Lowest eigenpair of a symmetric operator.
///
/// The start vector is drawn from a ChaCha8 stream seeded with
/// `opts.seed`, so repeated calls are bit-identical.
pub fn ground_state(op: &SparseOperator, opts: &LanczosOptions) -> Result<EigenResult, SolverError> {
    let dim = op.dim();
    if dim == 0 {
        return Err(SolverError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut start);

    let krylov_cap = opts.krylov_dim.max(2).min(dim);
    let mut total = 0usize;
    let mut last_residual = f64::INFINITY;
    loop {
        let mut run = lanczos_run(op, &start, krylov_cap, opts, &mut total);
        // The Rayleigh quotient of the assembled vector, not the Ritz value,
        // so that energy and vector are mutually consistent to rounding.
        run.energy = op.expectation(&run.vector);
        let scale = run.energy.abs().max(1.0);
        let residual = residual_norm(op, &run.vector, run.energy);
        if residual <= opts.tol * scale || run.exhausted {
            let gap = run.second.map(|e2| e2 - run.energy);
            return Ok(EigenResult {
                energies: vec![run.energy],
                vectors: vec![run.vector],
                degenerate: gap.is_some_and(|g| g < DEGENERACY_TOL),
                gap,
                residual,
                iterations: total,
            });
        }
        if total >= opts.max_iter || residual >= last_residual {
            return Err(SolverError::NotConverged {
                iterations: total,
                residual,
            });
        }
        last_residual = residual;
        start = run.vector;
    }
}

struct LanczosRun {
    energy: f64,
    second: Option<f64>,
    vector: Vec<f64>,
    /// Krylov space hit an invariant subspace or the full dimension.
    exhausted: bool,
}

fn lanczos_run(
    op: &SparseOperator,
    start: &[f64],
    krylov_cap: usize,
    opts: &LanczosOptions,
    total: &mut usize,
) -> LanczosRun {
    let dim = op.dim();
    let mut basis: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];

    let (energy, second, s, exhausted) = loop {
        let j = basis.len() - 1;
        op.apply_into(&basis[j], &mut w);
        *total += 1;
        let a = dot(&basis[j], &w);
        alpha.push(a);
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let k = alpha.len();
        let full = k >= krylov_cap || k == dim;
        let breakdown = b <= 1e-13 * alpha.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let budget_out = *total >= opts.max_iter;

        if k.is_multiple_of(5) || full || breakdown || budget_out {
            let (theta, second, s) = tridiagonal_lowest(&alpha, &beta);
            let estimate = (b * s[k - 1]).abs();
            if estimate <= 0.1 * opts.tol * theta.abs().max(1.0) || full || breakdown || budget_out {
                break (theta, second, s, breakdown || k == dim);
            }
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    };

    let mut vector = vec![0.0; dim];
    for (q, c) in basis.iter().zip(&s) {
        vector.iter_mut().zip(q).for_each(|(v, x)| *v += c * x);
    }
    normalize(&mut vector);
    LanczosRun {
        energy,
        second,
        vector,
        exhausted,
    }
}

/// Lowest eigenpair (and second eigenvalue) of the Lanczos tridiagonal.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Option<f64>, Vec<f64>) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let se = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let lo = order[0];
    let second = order.get(1).map(|&i| se.eigenvalues[i]);
    (
        se.eigenvalues[lo],
        second,
        se.eigenvectors.column(lo).iter().copied().collect(),
    )
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hamiltonian, ChainSpec, SpinBasis};

    fn chain_op(spec: &ChainSpec, sector: Option<i32>) -> SparseOperator {
        build_hamiltonian(spec, &SpinBasis::new(spec.n_sites, sector).unwrap()).unwrap()
    }

    #[test]
    fn two_site_xx() {
        let op = chain_op(&ChainSpec::xx(2, 1.0, 0.0), None);
        let gs = ground_state(&op, &LanczosOptions::default()).unwrap();
        assert!((gs.ground_energy() + 2.0).abs() < 1e-12);
        let full = full_spectrum(&op).unwrap();
        for (e, x) in full.energies.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_two_level_system() {
        let p = crate::lz::LzParams::new(2.0, 1.0, 0.5).unwrap();
        let op = crate::lz::hamiltonian_operator(&p, 1.0);
        let gs = ground_state(&op, &LanczosOptions::default()).unwrap();
        assert!((gs.ground_energy() + 0.5).abs() < 1e-12);
        assert!((gs.ground_energy() - crate::lz::ground_energy(&p, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn trace_identity() {
        let op = chain_op(&ChainSpec::xx(8, 1.0, 1.0), None);
        let full = full_spectrum(&op).unwrap();
        assert!((full.energies.iter().sum::<f64>() - op.trace()).abs() < 1e-9);
    }

    #[test]
    fn frobenius_identity() {
        let spec = ChainSpec {
            n_sites: 10,
            jx: 0.83,
            jy: 0.83,
            lambda_z: -1.37,
            field_h: 0.41,
            ..ChainSpec::default()
        };
        let op = chain_op(&spec, None);
        let full = full_spectrum(&op).unwrap();
        let sum_sq: f64 = full.energies.iter().map(|e| e * e).sum();
        assert!((sum_sq - op.frobenius_norm_sq()).abs() < 1e-8 * op.frobenius_norm_sq().max(1.0));
    }

    #[test]
    fn dense_eigenvectors_are_orthonormal() {
        let op = chain_op(&ChainSpec::xxz(8, 1.0, 0.7), Some(0));
        let full = full_spectrum(&op).unwrap();
        for i in (0..full.len()).step_by(7) {
            for j in (i..full.len()).step_by(5) {
                let d = dot(&full.vectors[i], &full.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10);
            }
            assert!(residual_norm(&op, &full.vectors[i], full.energies[i]) < 1e-9);
        }
    }

    #[test]
    fn lanczos_matches_dense_on_pinned_ferromagnet() {
        let spec = ChainSpec::xxz(12, 1.0, -6.0);
        let op = chain_op(&spec, Some(12));
        let dense = full_spectrum(&op).unwrap();
        let gs = ground_state(&op, &LanczosOptions::default()).unwrap();
        assert!((gs.ground_energy() - dense.ground_energy()).abs() < 1e-10);
        // Sector with magnons: still compare against dense.
        let op = chain_op(&spec, Some(8));
        let dense = full_spectrum(&op).unwrap();
        let gs = ground_state(&op, &LanczosOptions::default()).unwrap();
        assert!((gs.ground_energy() - dense.ground_energy()).abs() < 1e-10);
    }

    #[test]
    fn lanczos_is_variational_and_converged() {
        for (lambda, h) in [(-1.0, 0.0), (0.0, 0.3), (1.5, 0.0), (3.0, 0.1)] {
            let spec = ChainSpec {
                field_h: h,
                ..ChainSpec::xxz(10, 1.0, lambda)
            };
            let op = chain_op(&spec, Some(0));
            let dense = full_spectrum(&op).unwrap().ground_energy();
            let gs = ground_state(&op, &LanczosOptions::default()).unwrap();
            assert!(gs.ground_energy() >= dense - 1e-9);
            assert!((gs.ground_energy() - dense).abs() < 1e-10);
            assert!(gs.residual <= 1e-9 * gs.ground_energy().abs().max(1.0));
        }
    }

    #[test]
    fn lanczos_restarts_with_a_small_krylov_space() {
        let op = chain_op(&ChainSpec::xxz(10, 1.0, 0.5), Some(0));
        let dense = full_spectrum(&op).unwrap().ground_energy();
        let opts = LanczosOptions {
            krylov_dim: 20,
            ..LanczosOptions::default()
        };
        let gs = ground_state(&op, &opts).unwrap();
        assert!((gs.ground_energy() - dense).abs() < 1e-10);
        assert!(gs.iterations > 20);
    }

    #[test]
    fn lanczos_reports_non_convergence() {
        let op = chain_op(&ChainSpec::xxz(12, 1.0, 0.5), Some(0));
        let opts = LanczosOptions {
            krylov_dim: 4,
            max_iter: 8,
            ..LanczosOptions::default()
        };
        assert!(matches!(
            ground_state(&op, &opts),
            Err(SolverError::NotConverged { .. })
        ));
    }

    #[test]
    fn lanczos_is_reproducible() {
        let op = chain_op(&ChainSpec::xxz(10, 1.0, 1.1), Some(0));
        let a = ground_state(&op, &LanczosOptions::default()).unwrap();
        let b = ground_state(&op, &LanczosOptions::default()).unwrap();
        assert_eq!(a.ground_energy().to_bits(), b.ground_energy().to_bits());
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn xx_spectrum_is_symmetric_at_zero_field() {
        let op = chain_op(&ChainSpec::xx(8, 1.0, 0.0), None);
        let e = full_spectrum(&op).unwrap().energies;
        for (lo, hi) in e.iter().zip(e.iter().rev()) {
            assert!((lo + hi).abs() < 1e-10);
        }
    }

    #[test]
    fn guards() {
        let empty = SparseOperator::from_triplets(0, []);
        assert_eq!(full_spectrum(&empty), Err(SolverError::Empty));
        assert_eq!(
            ground_state(&empty, &LanczosOptions::default()),
            Err(SolverError::Empty)
        );
        let big = SparseOperator::from_triplets(MAX_DENSE_DIM + 1, []);
        assert!(matches!(full_spectrum(&big), Err(SolverError::DimensionGuard { .. })));
    }

    #[test]
    fn one_dimensional_operator() {
        let op = SparseOperator::from_triplets(1, [(0, 0, -3.5)]);
        let gs = ground_state(&op, &LanczosOptions::default()).unwrap();
        assert_eq!(gs.ground_energy(), -3.5);
        assert_eq!(gs.gap, None);
    }

    #[test]
    fn degenerate_ground_state_is_flagged_by_dense_path() {
        // Unpinned ferromagnet: all-up and all-down are degenerate.
        let spec = ChainSpec {
            pin_strength: 0.0,
            ..ChainSpec::xxz(6, 1.0, -5.0)
        };
        let full = full_spectrum(&chain_op(&spec, None)).unwrap();
        assert!(full.degenerate);
        let pinned = full_spectrum(&chain_op(&ChainSpec::xxz(6, 1.0, -5.0), None)).unwrap();
        assert!(!pinned.degenerate);
    }
}
