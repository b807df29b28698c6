//! Closed-form Landau–Zener quantities.
//!
//! `H(λ) = (−Δ/2 + aλ) σz + ε σx`, with ground energy
//! `E0(λ) = −½ √(4ε² + (Δ − 2aλ)²)`. For `ε = 0` the two levels cross at
//! `λc = Δ/(2a)`; for `ε > 0` the crossing is avoided.

use thiserror::Error;

use crate::chain::SparseOperator;
use crate::work::WorkDistribution;

/// Distance from `λc` treated as sitting on the level crossing.
pub const CROSSING_TOL: f64 = 1e-12;
/// Smallest nonzero ε accepted by the second-order irreversible work.
pub const MIN_EPS_SECOND_ORDER: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LzError {
    #[error("field coupling a must be nonzero (a ≠ 0)")]
    ZeroCoupling,
    #[error("off-diagonal coupling must satisfy eps ≥ 0, got {0}")]
    NegativeEps(f64),
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("ground state is degenerate at the level crossing λ = λc = {lam_c}")]
    Degenerate { lam_c: f64 },
    #[error("no latent jump at an avoided crossing (eps = {eps} > 0)")]
    AvoidedCrossing { eps: f64 },
    #[error("second-order irreversible work needs eps = 0 or eps ≥ {MIN_EPS_SECOND_ORDER:e}, got {eps:e}")]
    EpsTooSmall { eps: f64 },
}

/// The Landau–Zener triple `(Δ, a, ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzParams {
    delta: f64,
    a: f64,
    eps: f64,
}

impl LzParams {
    pub fn new(delta: f64, a: f64, eps: f64) -> Result<Self, LzError> {
        for (name, v) in [("delta", delta), ("a", a), ("eps", eps)] {
            if !v.is_finite() {
                return Err(LzError::NonFinite(name));
            }
        }
        if a == 0.0 {
            return Err(LzError::ZeroCoupling);
        }
        if eps < 0.0 {
            return Err(LzError::NegativeEps(eps));
        }
        Ok(Self { delta, a, eps })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `λc = Δ/(2a)`.
    pub fn critical_point(&self) -> f64 {
        self.delta / (2.0 * self.a)
    }

    pub fn is_level_crossing(&self) -> bool {
        self.eps == 0.0
    }

    fn detuning(&self, lam: f64) -> f64 {
        self.delta - 2.0 * self.a * lam
    }

    /// `√(4ε² + (Δ − 2aλ)²)`, twice the half-gap.
    fn gap(&self, lam: f64) -> f64 {
        (2.0 * self.eps).hypot(self.detuning(lam))
    }

    fn check_nondegenerate(&self, lam: f64) -> Result<(), LzError> {
        if self.is_level_crossing() && (lam - self.critical_point()).abs() <= CROSSING_TOL {
            Err(LzError::Degenerate {
                lam_c: self.critical_point(),
            })
        } else {
            Ok(())
        }
    }

    /// σz coefficient `−Δ/2 + aλ`.
    fn z_field(&self, lam: f64) -> f64 {
        -0.5 * self.delta + self.a * lam
    }
}

pub fn ground_energy(p: &LzParams, lam: f64) -> f64 {
    -0.5 * p.gap(lam)
}

/// `∂E0/∂λ = a(Δ − 2aλ)/√(4ε² + (Δ − 2aλ)²)`.
pub fn denergy(p: &LzParams, lam: f64) -> Result<f64, LzError> {
    p.check_nondegenerate(lam)?;
    Ok(p.a * p.detuning(lam) / p.gap(lam))
}

/// `∂²E0/∂λ² = −8a²ε²/(4ε² + (Δ − 2aλ)²)^{3/2}`.
pub fn d2energy(p: &LzParams, lam: f64) -> Result<f64, LzError> {
    p.check_nondegenerate(lam)?;
    let g = p.gap(lam);
    Ok(-8.0 * p.a * p.a * p.eps * p.eps / (g * g * g))
}

/// `⟨W⟩ = δλ ∂E0/∂λ|λi`.
pub fn average_work(p: &LzParams, lam_i: f64, dlam: f64) -> Result<f64, LzError> {
    Ok(dlam * denergy(p, lam_i)?)
}

/// Discontinuity of `⟨W⟩/δλ` across the level crossing, reported as the
/// left limit minus the right limit: `2|a|`, i.e. `2a` for `a > 0`.
pub fn latent_jump(p: &LzParams) -> Result<f64, LzError> {
    if !p.is_level_crossing() {
        return Err(LzError::AvoidedCrossing { eps: p.eps });
    }
    Ok(2.0 * p.a.abs())
}

/// Ground and excited eigenvectors in the (↑, ↓) σz basis.
fn eigenvectors(p: &LzParams, lam: f64) -> ([f64; 2], [f64; 2]) {
    let b = p.z_field(lam);
    let r = 0.5 * p.gap(lam);
    if r == 0.0 {
        return ([1.0, 0.0], [0.0, 1.0]);
    }
    // (H + r) v = 0; pick the row that avoids cancellation.
    let v = if b >= 0.0 { [-p.eps, b + r] } else { [r - b, -p.eps] };
    let norm = v[0].hypot(v[1]);
    let g = [v[0] / norm, v[1] / norm];
    (g, [g[1], -g[0]])
}

/// Two-outcome `P(W)` from exact 2×2 eigendecompositions at `λi` and `λf`.
pub fn work_distribution(p: &LzParams, lam_i: f64, lam_f: f64) -> Result<WorkDistribution, LzError> {
    p.check_nondegenerate(lam_i)?;
    let (psi0, _) = eigenvectors(p, lam_i);
    let (phi0, phi1) = eigenvectors(p, lam_f);
    let e0_i = ground_energy(p, lam_i);
    let e0_f = ground_energy(p, lam_f);
    let overlap = |u: [f64; 2], v: [f64; 2]| (u[0] * v[0] + u[1] * v[1]).powi(2);
    Ok(WorkDistribution::from_levels([
        (e0_f - e0_i, overlap(psi0, phi0)),
        (-e0_f - e0_i, overlap(psi0, phi1)),
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrrMode {
    /// `⟨W⟩ − ΔU`.
    Exact,
    /// `−(δλ²/2) ∂²E0/∂λ²`.
    SecondOrder,
}

pub fn irr_work(p: &LzParams, lam_i: f64, dlam: f64, mode: IrrMode) -> Result<f64, LzError> {
    match mode {
        IrrMode::Exact => {
            let avg = average_work(p, lam_i, dlam)?;
            Ok(avg - (ground_energy(p, lam_i + dlam) - ground_energy(p, lam_i)))
        }
        IrrMode::SecondOrder => {
            if p.eps > 0.0 && p.eps < MIN_EPS_SECOND_ORDER {
                return Err(LzError::EpsTooSmall { eps: p.eps });
            }
            Ok(-0.5 * dlam * dlam * d2energy(p, lam_i)?)
        }
    }
}

/// `H(λ)` as a 2×2 operator over the one-site basis `{↓, ↑}` (bit encoding).
pub fn hamiltonian_operator(p: &LzParams, lam: f64) -> SparseOperator {
    let b = p.z_field(lam);
    SparseOperator::from_triplets(2, [(0, 0, -b), (1, 1, b), (0, 1, p.eps), (1, 0, p.eps)])
}

/// `V = ∂H/∂λ = a σz` over the same basis.
pub fn potential_operator(p: &LzParams) -> SparseOperator {
    SparseOperator::from_triplets(2, [(0, 0, -p.a), (1, 1, p.a)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lz(delta: f64, a: f64, eps: f64) -> LzParams {
        LzParams::new(delta, a, eps).unwrap()
    }

    #[test]
    fn ground_energy_examples() {
        assert_eq!(ground_energy(&lz(2.0, 1.0, 0.0), 0.0), -1.0);
        assert_eq!(ground_energy(&lz(2.0, 1.0, 0.0), 1.0), 0.0);
        assert_eq!(ground_energy(&lz(2.0, 1.0, 0.5), 1.0), -0.5);
    }

    #[test]
    fn ground_energy_is_symmetric_about_critical_point() {
        let p = lz(1.3, -0.7, 0.2);
        let c = p.critical_point();
        for x in [0.01, 0.3, 2.0] {
            assert_relative_eq!(ground_energy(&p, c - x), ground_energy(&p, c + x), max_relative = 1e-14);
            assert!(ground_energy(&p, c + x) <= 0.0);
        }
    }

    #[test]
    fn denergy_examples() {
        assert_eq!(denergy(&lz(2.0, 1.0, 0.0), 0.5).unwrap(), 1.0);
        assert_eq!(denergy(&lz(2.0, 1.0, 0.0), 1.5).unwrap(), -1.0);
        assert_eq!(denergy(&lz(2.0, 1.0, 1.0), 1.0).unwrap(), 0.0);
        assert!(matches!(
            denergy(&lz(2.0, 1.0, 0.0), 1.0),
            Err(LzError::Degenerate { .. })
        ));
    }

    #[test]
    fn d2energy_examples() {
        assert_relative_eq!(d2energy(&lz(2.0, 1.0, 0.1), 1.0).unwrap(), -10.0, max_relative = 1e-14);
        assert_eq!(d2energy(&lz(2.0, 1.0, 0.0), 0.3).unwrap(), 0.0);
        assert_eq!(d2energy(&lz(2.0, 1.0, 1.0), 1.0).unwrap(), -1.0);
        assert!(d2energy(&lz(2.0, 1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn average_work_examples() {
        let p = lz(2.0, 1.0, 0.0);
        assert_relative_eq!(average_work(&p, 0.5, 1e-5).unwrap(), 1e-5, max_relative = 1e-15);
        assert_relative_eq!(average_work(&p, 1.5, 1e-5).unwrap(), -1e-5, max_relative = 1e-15);
        assert_eq!(average_work(&lz(0.3, 2.0, 0.4), 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn latent_jump_examples() {
        assert_eq!(latent_jump(&lz(2.0, 1.0, 0.0)).unwrap(), 2.0);
        assert_eq!(latent_jump(&lz(2.0, 3.0, 0.0)).unwrap(), 6.0);
        assert!(matches!(
            latent_jump(&lz(2.0, 1.0, 0.1)),
            Err(LzError::AvoidedCrossing { .. })
        ));
    }

    #[test]
    fn latent_jump_equals_left_minus_right_limit() {
        for a in [1.0, 3.0, -0.5] {
            let p = lz(2.0, a, 0.0);
            let c = p.critical_point();
            let left = average_work(&p, c - 1e-3, 1e-6).unwrap() / 1e-6;
            let right = average_work(&p, c + 1e-3, 1e-6).unwrap() / 1e-6;
            assert_eq!(left - right, latent_jump(&p).unwrap());
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert_eq!(LzParams::new(2.0, 0.0, 0.1), Err(LzError::ZeroCoupling));
        assert!(matches!(LzParams::new(2.0, 1.0, -0.1), Err(LzError::NegativeEps(_))));
        assert!(LzParams::new(f64::NAN, 1.0, 0.1).is_err());
    }

    #[test]
    fn irr_work_examples() {
        let p = lz(2.0, 1.0, 0.1);
        assert_relative_eq!(
            irr_work(&p, 1.0, 0.01, IrrMode::SecondOrder).unwrap(),
            5e-4,
            max_relative = 1e-13
        );
        let p = lz(2.0, 1.0, 0.05);
        assert_relative_eq!(
            irr_work(&p, 1.0, 0.01, IrrMode::SecondOrder).unwrap(),
            1e-3,
            max_relative = 1e-13
        );
        let p = lz(2.0, 1.0, 0.0);
        assert!(irr_work(&p, 0.2, 0.3, IrrMode::Exact).unwrap().abs() < 1e-15);
        assert!(irr_work(&p, 1.4, 0.3, IrrMode::Exact).unwrap().abs() < 1e-15);
        assert!(matches!(
            irr_work(&lz(2.0, 1.0, 1e-9), 1.0, 0.01, IrrMode::SecondOrder),
            Err(LzError::EpsTooSmall { .. })
        ));
    }

    #[test]
    fn level_crossing_distribution_is_a_single_outcome() {
        let p = lz(2.0, 1.0, 0.0);
        let d = work_distribution(&p, 0.5, 0.6).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.outcomes()[0].probability, 1.0);
        assert_relative_eq!(d.outcomes()[0].work, 0.1, max_relative = 1e-14);
        assert_eq!(d.variance(), 0.0);
    }

    #[test]
    fn identity_quench_distribution() {
        let p = lz(0.7, 1.2, 0.3);
        let d = work_distribution(&p, 0.4, 0.4).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.outcomes()[0].work, 0.0);
        assert_relative_eq!(d.outcomes()[0].probability, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn degenerate_initial_state_rejected() {
        let p = lz(2.0, 1.0, 0.0);
        assert!(work_distribution(&p, 1.0, 1.1).is_err());
        // A degenerate final point is fine: both levels merge.
        let d = work_distribution(&p, 0.9, 1.0).unwrap();
        assert_eq!(d.len(), 1);
    }

    /// Brute-force 2×2 diagonalization in the σz basis, independent of the
    /// closed-form eigenvectors.
    fn brute_force_distribution(p: &LzParams, lam_i: f64, lam_f: f64) -> Vec<(f64, f64)> {
        let eig = |lam: f64| {
            let b = -0.5 * p.delta() + p.a() * lam;
            let m = nalgebra::Matrix2::new(b, p.eps(), p.eps(), -b);
            let se = m.symmetric_eigen();
            let mut pairs: Vec<(f64, [f64; 2])> = (0..2)
                .map(|k| (se.eigenvalues[k], [se.eigenvectors[(0, k)], se.eigenvectors[(1, k)]]))
                .collect();
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            pairs
        };
        let init = eig(lam_i);
        let fin = eig(lam_f);
        fin.iter()
            .map(|(e, v)| (e - init[0].0, (v[0] * init[0].1[0] + v[1] * init[0].1[1]).powi(2)))
            .collect()
    }

    #[test]
    fn avoided_crossing_distribution_matches_brute_force() {
        let p = lz(2.0, 1.0, 0.1);
        let d = work_distribution(&p, 1.0, 1.01).unwrap();
        let oracle = brute_force_distribution(&p, 1.0, 1.01);
        assert_eq!(d.len(), 2);
        for (o, (w, prob)) in d.outcomes().iter().zip(oracle) {
            assert!((o.work - w).abs() < 1e-13);
            assert!((o.probability - prob).abs() < 1e-13);
        }
        // Leading-order excitation probability (δλ a / 2ε)².
        let p1 = d.outcomes()[1].probability;
        assert!((p1 / (0.01f64 / 0.2).powi(2) - 1.0).abs() < 0.05, "{p1}");
        // Exact irreversible work vs the divergent second-order value δλ²a²/(2ε).
        let irr = d.mean() - d.outcomes()[0].work;
        assert!((irr / 5e-4 - 1.0).abs() < 2.0 * 0.01, "{irr}");
    }

    #[test]
    fn first_moment_identity() {
        for (p, li) in [
            (lz(2.0, 1.0, 0.1), 0.9),
            (lz(-1.0, 0.4, 0.7), 2.0),
            (lz(2.0, 1.0, 0.0), 0.3),
        ] {
            for dl in [1e-2, 1e-3, -5e-3] {
                let d = work_distribution(&p, li, li + dl).unwrap();
                let avg = average_work(&p, li, dl).unwrap();
                assert!((d.mean() - avg).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn variance_vanishes_for_level_crossing() {
        let p = lz(2.0, 1.0, 0.0);
        for (li, lf) in [(0.1, 0.4), (1.3, 1.9), (0.5, 0.5)] {
            assert_eq!(work_distribution(&p, li, lf).unwrap().variance(), 0.0);
        }
    }

    #[test]
    fn second_order_error_scales_linearly_in_the_quench() {
        let p = lz(2.0, 1.0, 0.5);
        let rel = |dl: f64| {
            let exact = irr_work(&p, 0.75, dl, IrrMode::Exact).unwrap();
            let approx = irr_work(&p, 0.75, dl, IrrMode::SecondOrder).unwrap();
            (exact - approx).abs() / exact
        };
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4].into_iter().map(rel).collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((8.0..12.5).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn operators_match_closed_forms() {
        let p = lz(2.0, 1.0, 0.5);
        let h = hamiltonian_operator(&p, 1.0);
        assert!(h.is_symmetric(0.0));
        let v = potential_operator(&p);
        let h2 = hamiltonian_operator(&p, 1.25);
        assert!(h.add_scaled(&v, 0.25).max_abs_diff(&h2) < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = (LzParams, f64)> {
            (-3.0..3.0f64, 0.2..2.0f64, prop::bool::ANY, 0.05..2.0f64, -2.0..2.0f64)
                .prop_map(|(d, a, neg, e, l)| (LzParams::new(d, if neg { -a } else { a }, e).unwrap(), l))
        }

        proptest! {
            #[test]
            fn derivatives_match_finite_differences((p, l) in params()) {
                let h = 1e-6;
                let fd1 = (ground_energy(&p, l + h) - ground_energy(&p, l - h)) / (2.0 * h);
                let d1 = denergy(&p, l).unwrap();
                prop_assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1e-2 * p.a().abs()));
                let h = 1e-4;
                let fd2 = (ground_energy(&p, l + h) - 2.0 * ground_energy(&p, l) + ground_energy(&p, l - h)) / (h * h);
                let d2 = d2energy(&p, l).unwrap();
                // Rounding in the second difference is about ε_mach·|E|/h² ≈ 1e-7.
                prop_assert!((fd2 - d2).abs() <= 1e-6 + 1e-5 * d2.abs());
            }

            #[test]
            fn clausius_holds((p, l) in params(), dl in -0.5..0.5f64) {
                prop_assert!(irr_work(&p, l, dl, IrrMode::Exact).unwrap() >= -1e-15);
            }

            #[test]
            fn distribution_is_normalized((p, l) in params(), dl in -0.5..0.5f64) {
                let d = work_distribution(&p, l, l + dl).unwrap();
                prop_assert!((d.total_probability() - 1.0).abs() < 1e-12);
                let avg = average_work(&p, l, dl).unwrap();
                prop_assert!((d.mean() - avg).abs() < 1e-12);
            }
        }
    }
}
