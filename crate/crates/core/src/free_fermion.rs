//! Jordan–Wigner solution of the XX chain in a longitudinal field.
//!
//! With `σz = 2n − 1` and `σ⁺σ⁻ + σ⁻σ⁺ → c†c + h.c.`, the spin Hamiltonian
//! `J Σ (σxσx + σyσy) + h Σ σz` becomes a hopping problem with single-particle
//! matrix `2h` on the diagonal and `2J` on the off-diagonals, plus the
//! constant `−n·h`. The many-body ground state fills every negative mode, so
//! `E0 = Σ_{ε<0} ε − n·h = −½ Σ |ε|` and `Σσz = 2·N_filled − n`.
//!
//! Large positive `h` empties the band, so the polarized state has
//! `Σσz = −n`. The band edge `ε = 2h − 4|J|` closes at `h = 2|J|`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::chain::Boundary;
use crate::work::WorkMoments;

/// Mode energies closer to zero than this make the filling ambiguous.
pub const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FreeFermionError {
    #[error("chain needs at least 2 sites, got {0}")]
    TooShort(usize),
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("mode energy {energy:e} at h = {h} is within {ZERO_MODE_TOL:e} of zero")]
    ZeroMode { h: f64, energy: f64 },
}

/// Solved XX chain: mode energies of the ground-state fermion-parity sector
/// and the resulting filling.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeFermionChain {
    pub n_sites: usize,
    pub j: f64,
    pub h: f64,
    pub boundary: Boundary,
    /// Ascending single-particle energies.
    pub mode_energies: Vec<f64>,
    /// Number of occupied modes in the ground state.
    pub filled: usize,
    pub ground_energy: f64,
}

impl FreeFermionChain {
    pub fn new(n_sites: usize, j: f64, h: f64, boundary: Boundary) -> Result<Self, FreeFermionError> {
        validate(n_sites, j, h)?;
        Ok(match boundary {
            Boundary::Open => {
                let modes = open_modes(n_sites, j, h);
                let filled = modes.iter().filter(|&&e| e < 0.0).count();
                let ground_energy = sea_energy(&modes, filled, n_sites, h);
                Self {
                    n_sites,
                    j,
                    h,
                    boundary,
                    mode_energies: modes,
                    filled,
                    ground_energy,
                }
            }
            Boundary::Periodic => {
                let (modes, filled, ground_energy) = [0usize, 1]
                    .into_iter()
                    .map(|parity| periodic_sector(n_sites, j, h, parity))
                    .min_by(|a, b| a.2.total_cmp(&b.2))
                    .expect("two parity sectors");
                Self {
                    n_sites,
                    j,
                    h,
                    boundary,
                    mode_energies: modes,
                    filled,
                    ground_energy,
                }
            }
        })
    }

    /// `Σ⟨σz⟩` of the ground state.
    pub fn magnetization(&self) -> f64 {
        2.0 * self.filled as f64 - self.n_sites as f64
    }

    /// Mode energy nearest zero.
    pub fn min_abs_mode(&self) -> f64 {
        self.mode_energies
            .iter()
            .copied()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .expect("at least two modes")
    }

    pub fn has_zero_mode(&self) -> bool {
        self.min_abs_mode().abs() < ZERO_MODE_TOL
    }
}

fn validate(n: usize, j: f64, h: f64) -> Result<(), FreeFermionError> {
    if n < 2 {
        return Err(FreeFermionError::TooShort(n));
    }
    if !j.is_finite() {
        return Err(FreeFermionError::NonFinite("j"));
    }
    if !h.is_finite() {
        return Err(FreeFermionError::NonFinite("h"));
    }
    Ok(())
}

fn open_modes(n: usize, j: f64, h: f64) -> Vec<f64> {
    let mut modes: Vec<f64> = (1..=n)
        .map(|k| 2.0 * h + 4.0 * j * (k as f64 * PI / (n + 1) as f64).cos())
        .collect();
    modes.sort_by(f64::total_cmp);
    modes
}

/// Energy of the lowest `filled` modes, plus the `−n·h` offset.
fn sea_energy(sorted_modes: &[f64], filled: usize, n: usize, h: f64) -> f64 {
    sorted_modes[..filled].iter().sum::<f64>() - n as f64 * h
}

/// Ground state restricted to fermion parity `parity` (0 even, 1 odd).
///
/// The boundary hop picks up `−(−1)^N`, so even `N` sees antiperiodic
/// momenta `π(2m+1)/n` and odd `N` periodic ones `2πm/n`. If filling every
/// negative mode gives the wrong parity, the mode nearest zero is toggled.
fn periodic_sector(n: usize, j: f64, h: f64, parity: usize) -> (Vec<f64>, usize, f64) {
    let shift = if parity == 0 { PI / n as f64 } else { 0.0 };
    let mut modes: Vec<f64> = (0..n)
        .map(|m| 2.0 * h + 4.0 * j * (2.0 * PI * m as f64 / n as f64 + shift).cos())
        .collect();
    modes.sort_by(f64::total_cmp);
    let negative = modes.iter().filter(|&&e| e < 0.0).count();
    let filled = if negative % 2 == parity {
        negative
    } else if negative == 0 {
        1
    } else if negative == n || modes[negative].abs() >= modes[negative - 1].abs() {
        negative - 1
    } else {
        negative + 1
    };
    let energy = sea_energy(&modes, filled, n, h);
    (modes, filled, energy)
}

/// Single-particle energies, ascending. For a periodic chain these are the
/// momenta of the ground-state parity sector.
pub fn xx_mode_energies(n: usize, j: f64, h: f64, boundary: Boundary) -> Result<Vec<f64>, FreeFermionError> {
    Ok(FreeFermionChain::new(n, j, h, boundary)?.mode_energies)
}

/// Open-chain ground-state energy.
pub fn xx_ground_energy(n: usize, j: f64, h: f64) -> Result<f64, FreeFermionError> {
    Ok(FreeFermionChain::new(n, j, h, Boundary::Open)?.ground_energy)
}

/// Open-chain `Σ⟨σz⟩`; fails when a mode sits at zero energy.
pub fn xx_magnetization(n: usize, j: f64, h: f64) -> Result<f64, FreeFermionError> {
    let chain = FreeFermionChain::new(n, j, h, Boundary::Open)?;
    check_zero_mode(&chain)?;
    Ok(chain.magnetization())
}

fn check_zero_mode(chain: &FreeFermionChain) -> Result<(), FreeFermionError> {
    if chain.has_zero_mode() {
        return Err(FreeFermionError::ZeroMode {
            h: chain.h,
            energy: chain.min_abs_mode(),
        });
    }
    Ok(())
}

/// `E0(h + dh) − E0(h)` on the open chain, summed mode by mode.
///
/// Every mode moves by exactly `2·dh`, so modes whose occupation does not
/// change contribute `2·dh` each without any cancellation; only modes that
/// cross zero are evaluated numerically. When no mode crosses, the result
/// is bitwise `dh·M(h)`.
pub fn xx_energy_change(n: usize, j: f64, h: f64, dh: f64) -> Result<f64, FreeFermionError> {
    let chain = FreeFermionChain::new(n, j, h, Boundary::Open)?;
    Ok(energy_change(&chain, dh))
}

fn energy_change(initial: &FreeFermionChain, dh: f64) -> f64 {
    let (h, j, n) = (initial.h, initial.j, initial.n_sites);
    let fin = open_modes(n, j, h + dh);
    let mut stay_filled = 0i64;
    let mut crossing = 0.0;
    for (&e_i, &e_f) in initial.mode_energies.iter().zip(&fin) {
        match (e_i < 0.0, e_f < 0.0) {
            (true, true) => stay_filled += 1,
            (false, false) => {}
            _ => crossing += e_f.min(0.0) - e_i.min(0.0),
        }
    }
    dh * (2 * stay_filled - n as i64) as f64 + crossing
}

/// Moments of the sudden field quench `h_i → h_i + dh` on the open chain.
///
/// `Σσz` commutes with the XX Hamiltonian, so the initial ground state is an
/// eigenstate of the final one: the distribution is a single delta at
/// `dh·M(h_i)`.
pub fn xx_quench_moments(n: usize, j: f64, h_i: f64, dh: f64) -> Result<WorkMoments, FreeFermionError> {
    let initial = FreeFermionChain::new(n, j, h_i, Boundary::Open)?;
    check_zero_mode(&initial)?;
    if !dh.is_finite() {
        return Err(FreeFermionError::NonFinite("dh"));
    }
    let avg_work = dh * initial.magnetization();
    let delta_u = energy_change(&initial, dh);
    Ok(WorkMoments {
        avg_work,
        delta_u,
        irr_work: avg_work - delta_u,
        variance: 0.0,
        commuting_flag: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn tridiagonal_oracle(n: usize, j: f64, h: f64) -> Vec<f64> {
        let m = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                2.0 * h
            } else if r.abs_diff(c) == 1 {
                2.0 * j
            } else {
                0.0
            }
        });
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn two_sites() {
        assert_eq!(xx_mode_energies(2, 1.0, 0.0, Boundary::Open).unwrap().len(), 2);
        let e = xx_mode_energies(2, 1.0, 0.0, Boundary::Open).unwrap();
        assert!((e[0] + 2.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
        assert!((xx_ground_energy(2, 1.0, 0.0).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn open_modes_match_single_particle_matrix() {
        for (n, j, h) in [(5, 1.0, 0.3), (12, 0.7, -1.1), (33, -1.3, 2.5)] {
            let closed = xx_mode_energies(n, j, h, Boundary::Open).unwrap();
            for (a, b) in closed.iter().zip(tridiagonal_oracle(n, j, h)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ground_energy_is_half_absolute_sum() {
        for h in [0.0, 0.4, 1.9, 2.1, 5.0] {
            let chain = FreeFermionChain::new(20, 1.0, h, Boundary::Open).unwrap();
            let half: f64 = -0.5 * chain.mode_energies.iter().map(|e| e.abs()).sum::<f64>();
            assert!((chain.ground_energy - half).abs() < 1e-12);
        }
    }

    #[test]
    fn field_shift_moves_every_mode_by_twice_the_shift() {
        let a = xx_mode_energies(16, 1.0, 0.3, Boundary::Open).unwrap();
        let b = xx_mode_energies(16, 1.0, 0.8, Boundary::Open).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn polarized_paramagnet() {
        for n in [2, 17, 64] {
            let modes = xx_mode_energies(n, 1.0, 10.0, Boundary::Open).unwrap();
            assert!(modes.iter().all(|&e| e > 0.0));
            assert_eq!(xx_ground_energy(n, 1.0, 10.0).unwrap(), -10.0 * n as f64);
        }
        assert_eq!(xx_magnetization(64, 1.0, 10.0).unwrap(), -64.0);
        assert_eq!(xx_magnetization(64, 1.0, -10.0).unwrap(), 64.0);
        assert_eq!(xx_magnetization(64, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn magnetization_is_field_derivative_of_energy() {
        for h in [0.13, 0.77, 1.41, 1.93, 2.6] {
            let step = 1e-6;
            let fd = (xx_ground_energy(40, 1.0, h + step).unwrap() - xx_ground_energy(40, 1.0, h - step).unwrap())
                / (2.0 * step);
            assert!((fd - xx_magnetization(40, 1.0, h).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_mode_is_rejected() {
        // n = 2: modes 2h ± 2, so h = 1 puts one mode at zero.
        assert!(matches!(
            xx_magnetization(2, 1.0, 1.0),
            Err(FreeFermionError::ZeroMode { .. })
        ));
        assert!(xx_quench_moments(2, 1.0, 1.0, 1e-3).is_err());
        assert!(xx_ground_energy(2, 1.0, 1.0).is_ok());
    }

    #[test]
    fn energy_change_matches_ground_energy_difference() {
        for (n, h, dh) in [(40, 0.5, 1e-3), (40, 1.9, 0.3), (128, 1.2, -0.05), (7, 3.0, -2.0)] {
            let direct = xx_ground_energy(n, 1.0, h + dh).unwrap() - xx_ground_energy(n, 1.0, h).unwrap();
            assert!((xx_energy_change(n, 1.0, h, dh).unwrap() - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn irreversible_work_is_exactly_zero_without_a_crossing() {
        // Modes of the n = 2048 chain near h = 1.3 are far from zero at this dh.
        let m = xx_quench_moments(2048, 1.0, 0.013, 1e-9).unwrap();
        assert_eq!(m.irr_work, 0.0);
        assert_eq!(m.delta_u, m.avg_work);
    }

    #[test]
    fn irreversible_work_counts_crossing_modes() {
        // n = 2: modes 2h ± 2; quenching across h = 1 empties the lower mode.
        let m = xx_quench_moments(2, 1.0, 0.9, 0.2).unwrap();
        // irr = (ε_f of the crossing mode) = 2·1.1 − 2.
        assert!((m.irr_work - 0.2).abs() < 1e-14);
    }

    #[test]
    fn quench_in_polarized_phase_is_reversible() {
        let m = xx_quench_moments(512, 1.0, 10.0, 1e-3).unwrap();
        assert!(m.irr_work.abs() < 1e-12);
        assert!(m.commuting_flag);
        assert_eq!(m.variance, 0.0);
    }

    #[test]
    fn quench_moments_obey_clausius() {
        for k in 0..=60 {
            let h = 0.05 * k as f64 + 0.0123;
            if let Ok(m) = xx_quench_moments(64, 1.0, h, 1e-3) {
                assert!(m.irr_work >= -1e-12, "h = {h}: {}", m.irr_work);
                assert_eq!(m.irr_work, m.avg_work - m.delta_u);
            }
        }
    }

    #[test]
    fn periodic_parity_sectors() {
        // n = 4, h = 0: antiperiodic momenta give ±2√2 twice, even filling 2.
        let chain = FreeFermionChain::new(4, 1.0, 0.0, Boundary::Periodic).unwrap();
        assert_eq!(chain.mode_energies.len(), 4);
        assert!((chain.ground_energy + 4.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(chain.magnetization(), 0.0);
        // Deep in the polarized phase both boundaries agree.
        let p = FreeFermionChain::new(9, 1.0, 7.0, Boundary::Periodic).unwrap();
        assert_eq!(p.filled, 0);
        assert_eq!(p.ground_energy, -63.0);
    }

    #[test]
    fn invalid_input() {
        assert_eq!(xx_ground_energy(1, 1.0, 0.0), Err(FreeFermionError::TooShort(1)));
        assert!(xx_ground_energy(4, f64::NAN, 0.0).is_err());
        assert!(xx_ground_energy(4, 1.0, f64::INFINITY).is_err());
    }
}
