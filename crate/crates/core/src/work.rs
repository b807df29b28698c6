//! Two-point-measurement work statistics over numerical eigendata.
//!
//! A system prepared in the ground state `|ψ0⟩` of `H(λi)` is quenched to
//! `H(λf) = Σ_m E_m |φ_m⟩⟨φ_m|`. Measuring energy before and after gives
//! work `W_m = E_m − E0(λi)` with probability `|⟨ψ0|φ_m⟩|²`.
//!
//! States and spectra are always passed in; nothing here runs a solver.

use thiserror::Error;

use crate::chain::SparseOperator;
use crate::eigen::EigenResult;

/// Final levels closer than this are merged into one outcome.
pub const MERGE_TOL: f64 = 1e-12;
/// Allowed deviation of `‖ψ0‖²` and `Σ p_m` from one.
pub const NORM_TOL: f64 = 1e-12;
/// Allowed deviation of the lowest outcome from `ΔU`.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Lower bound on irreversible work tolerated as rounding.
pub const CLAUSIUS_TOL: f64 = 1e-12;
/// Variance at or below which a quench is flagged as commuting.
pub const COMMUTING_VARIANCE: f64 = 1e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkError {
    #[error("final spectrum is incomplete: {found} eigenpairs for dimension {dim}")]
    IncompleteSpectrum { found: usize, dim: usize },
    #[error("initial state is not normalized: ‖ψ0‖² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("work distribution invariant violated: {what} ({value:e})")]
    Invariant { what: &'static str, value: f64 },
}

/// The Hamiltonian parameter a quench acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuenchParam {
    /// The Z coupling λ, entering as `λ/2 σz σz` per bond.
    LambdaZ,
    /// The uniform field h, entering as `h σz` per site.
    FieldH,
}

impl QuenchParam {
    pub fn label(self) -> &'static str {
        match self {
            QuenchParam::LambdaZ => "lambda_z",
            QuenchParam::FieldH => "field_h",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "lambda_z" | "lambda" | "lz" => Some(QuenchParam::LambdaZ),
            "field_h" | "h" | "field" => Some(QuenchParam::FieldH),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSpec {
    pub param: QuenchParam,
    pub value_i: f64,
    pub delta: f64,
}

impl QuenchSpec {
    pub fn new(param: QuenchParam, value_i: f64, delta: f64) -> Self {
        Self { param, value_i, delta }
    }

    pub fn value_f(&self) -> f64 {
        self.value_i + self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkOutcome {
    pub work: f64,
    pub probability: f64,
}

/// Discrete work distribution `P(W) = Σ_m p_m δ(W − W_m)`.
///
/// Outcomes are sorted by work and merged within [`MERGE_TOL`]. The lowest
/// final level is always present, even when its probability is zero, so the
/// support minimum is `ΔU`. Higher levels with exactly zero probability are
/// dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkDistribution {
    outcomes: Vec<WorkOutcome>,
}

impl WorkDistribution {
    pub fn from_levels<I>(levels: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = levels.into_iter().collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut outcomes: Vec<WorkOutcome> = Vec::with_capacity(raw.len());
        let mut group_start = f64::NEG_INFINITY;
        for (work, probability) in raw {
            match outcomes.last_mut() {
                Some(last) if work - group_start <= MERGE_TOL => last.probability += probability,
                _ => {
                    group_start = work;
                    outcomes.push(WorkOutcome { work, probability });
                }
            }
        }
        if let Some((first, rest)) = outcomes.split_first() {
            let mut kept = vec![*first];
            kept.extend(rest.iter().filter(|o| o.probability != 0.0).copied());
            outcomes = kept;
        }
        Self { outcomes }
    }

    /// A quench whose outcome is certain.
    pub fn certain(work: f64) -> Self {
        Self {
            outcomes: vec![WorkOutcome { work, probability: 1.0 }],
        }
    }

    /// Adds the final ground level as a zero-probability outcome when it lies
    /// below the current support, e.g. when it sits in a symmetry sector the
    /// initial state has no weight in.
    pub fn with_ground_level(mut self, work: f64) -> Self {
        let below = self.outcomes.first().is_none_or(|o| work < o.work - MERGE_TOL);
        if below {
            self.outcomes.insert(0, WorkOutcome { work, probability: 0.0 });
        }
        self
    }

    pub fn outcomes(&self) -> &[WorkOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.work).sum()
    }

    /// Second central moment, accumulated as `Σ p (w − ⟨W⟩)²`.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.outcomes
            .iter()
            .map(|o| o.probability * (o.work - mean).powi(2))
            .sum()
    }

    pub fn min_work(&self) -> Option<f64> {
        self.outcomes.first().map(|o| o.work)
    }

    /// Normalization, non-negativity and min-support against `delta_u`.
    pub fn check_invariants(&self, delta_u: f64) -> Result<(), WorkError> {
        let total = self.total_probability();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(WorkError::Invariant {
                what: "probabilities do not sum to one",
                value: total - 1.0,
            });
        }
        if let Some(o) = self.outcomes.iter().find(|o| o.probability < 0.0) {
            return Err(WorkError::Invariant {
                what: "negative probability",
                value: o.probability,
            });
        }
        let min = self.min_work().unwrap_or(f64::NAN);
        let off = (min - delta_u).abs();
        if off.is_nan() || off > SUPPORT_TOL {
            return Err(WorkError::Invariant {
                what: "lowest outcome differs from ΔU",
                value: min - delta_u,
            });
        }
        Ok(())
    }
}

/// Derived scalars of a quench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkMoments {
    pub avg_work: f64,
    pub delta_u: f64,
    pub irr_work: f64,
    pub variance: f64,
    pub commuting_flag: bool,
}

impl WorkMoments {
    pub fn satisfies_clausius(&self) -> bool {
        self.irr_work >= -CLAUSIUS_TOL
    }
}

/// `P(W)` from the initial state and the complete final spectrum.
pub fn work_distribution(psi0: &[f64], final_spectrum: &EigenResult, e0_i: f64) -> Result<WorkDistribution, WorkError> {
    let dim = psi0.len();
    if final_spectrum.vectors.len() != final_spectrum.energies.len() || final_spectrum.energies.len() != dim {
        return Err(WorkError::IncompleteSpectrum {
            found: final_spectrum.vectors.len().min(final_spectrum.energies.len()),
            dim,
        });
    }
    if let Some(v) = final_spectrum.vectors.iter().find(|v| v.len() != dim) {
        return Err(WorkError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    let norm_sq = dot(psi0, psi0);
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(WorkError::NotNormalized { norm_sq });
    }

    let levels = final_spectrum
        .energies
        .iter()
        .zip(&final_spectrum.vectors)
        .map(|(&e, v)| (e - e0_i, dot(v, psi0).powi(2)));
    Ok(WorkDistribution::from_levels(levels))
}

/// Average work from the quench generator: `δλ ⟨ψ0|V|ψ0⟩`.
pub fn average_work_hf(psi0: &[f64], v_op: &SparseOperator, delta: f64) -> Result<f64, WorkError> {
    if psi0.len() != v_op.dim() {
        return Err(WorkError::DimensionMismatch {
            expected: v_op.dim(),
            found: psi0.len(),
        });
    }
    Ok(delta * v_op.expectation(psi0))
}

pub fn moments(dist: &WorkDistribution, delta_u: f64) -> WorkMoments {
    let avg_work = dist.mean();
    let variance = dist.variance();
    WorkMoments {
        avg_work,
        delta_u,
        irr_work: avg_work - delta_u,
        variance,
        commuting_flag: variance <= COMMUTING_VARIANCE,
    }
}

/// Outcome of comparing exact irreversible work with its second-order estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderCheck {
    /// `−δλ²/2 · E0''` with `E0''` from a centered second difference.
    pub estimate: f64,
    pub discrepancy: f64,
}

/// Compares `irr_exact` with `−δλ²/2 · ∂²E0/∂λ²`, the derivative taken from
/// ground energies at `λi − δλ`, `λi`, `λi + δλ`.
pub fn irr_second_order_check(e0_grid: [f64; 3], delta: f64, irr_exact: f64) -> SecondOrderCheck {
    let [e_minus, e_mid, e_plus] = e0_grid;
    let curvature = ((e_plus - e_mid) + (e_minus - e_mid)) / (delta * delta);
    let estimate = -0.5 * delta * delta * curvature;
    SecondOrderCheck {
        estimate,
        discrepancy: (irr_exact - estimate).abs() / irr_exact.abs().max(1e-300),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
