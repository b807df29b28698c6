use crate::chain::{build_hamiltonian, build_potential, Boundary, ChainSpec, SpinBasis};
use crate::eigen::{full_spectrum, ground_state, EigenResult, DEGENERACY_TOL};
use crate::free_fermion::{xx_quench_moments, FreeFermionChain, FreeFermionError};
use crate::lz::{self, LzParams};
use crate::work::{self, irr_second_order_check, moments, QuenchParam, WorkDistribution, WorkMoments, SUPPORT_TOL};

use super::{Model, ModelParams, SweepPlan, SweepRow};

/// Largest sector for which the final spectrum is computed densely; beyond
/// it only the moments that follow from the initial state are reported.
pub const DENSE_SECTOR_LIMIT: usize = 4096;

/// Tolerance on the first-moment identity before a row is flagged.
const FIRST_MOMENT_TOL: f64 = 1e-10;
/// Distance from a known degeneracy point that triggers a grid nudge.
const NUDGE_TOL: f64 = 1e-12;

/// Per-point facts that do not fit the CSV schema.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointDiagnostics {
    /// `Σ p_m`, when a distribution was built.
    pub total_probability: Option<f64>,
    /// Lowest outcome of the distribution.
    pub min_support: Option<f64>,
    /// Mean of the distribution.
    pub distribution_mean: Option<f64>,
    /// `δλ ⟨ψ0|V|ψ0⟩`.
    pub hf_avg_work: Option<f64>,
    /// `|⟨ψ0(λi)|ψ0(λf)⟩|²`.
    pub gs_overlap: Option<f64>,
    /// Sector of the initial ground state, for sector-resolved chains.
    pub sector: Option<i32>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub row: SweepRow,
    pub distribution: Option<WorkDistribution>,
    pub diagnostics: PointDiagnostics,
}

pub(super) fn is_degenerate_point(plan: &SweepPlan, x: f64) -> bool {
    match (plan.model, &plan.params) {
        (Model::Lz, ModelParams::Lz(p)) => {
            p.is_level_crossing() && (x - p.critical_point()).abs() <= NUDGE_TOL * p.critical_point().abs().max(1.0)
        }
        (Model::XxzEd, ModelParams::Chain(spec)) => {
            plan.param == QuenchParam::LambdaZ
                && spec.conserves_magnetization()
                && spec.field_h == 0.0
                && (x + 2.0 * spec.jx.abs()).abs() <= NUDGE_TOL * spec.jx.abs().max(1.0)
        }
        (Model::XxEd | Model::XxFf, ModelParams::Chain(spec)) => {
            plan.param == QuenchParam::FieldH
                && FreeFermionChain::new(spec.n_sites, spec.jx, x, Boundary::Open).is_ok_and(|c| c.has_zero_mode())
        }
        _ => false,
    }
}

/// Evaluates one grid point. Failures are recorded in the row flags with
/// NaN values; they never abort the sweep.
pub fn evaluate_point(plan: &SweepPlan, x: f64, nudged: bool) -> PointReport {
    let mut report = match &plan.params {
        ModelParams::Lz(p) => lz_point(plan, p, x),
        ModelParams::Chain(spec) => match plan.model {
            Model::XxFf => ff_point(plan, spec, x),
            _ => ed_point(plan, spec, x),
        },
    };
    if nudged {
        report.row.flags.insert(0, "nudged".into());
    }
    report
}

fn blank_row(plan: &SweepPlan, x: f64) -> SweepRow {
    SweepRow {
        model: plan.model,
        n_sites: plan.n_sites(),
        param: plan.param_label().to_string(),
        grid_value: x,
        delta: plan.delta,
        e0_i: f64::NAN,
        e0_f: f64::NAN,
        avg_work: f64::NAN,
        delta_u: f64::NAN,
        irr_work: f64::NAN,
        variance: f64::NAN,
        avg_work_per_delta: f64::NAN,
        irr_per_delta2: f64::NAN,
        eq2_discrepancy: f64::NAN,
        flags: Vec::new(),
    }
}

fn failed(plan: &SweepPlan, x: f64, flag: &str, error: String) -> PointReport {
    let mut row = blank_row(plan, x);
    row.flags.push(flag.into());
    PointReport {
        row,
        distribution: None,
        diagnostics: PointDiagnostics {
            error: Some(error),
            ..PointDiagnostics::default()
        },
    }
}

/// Fills the energy and moment columns shared by every model.
fn fill_row(row: &mut SweepRow, e0: [f64; 3], m: &WorkMoments) {
    let [e_minus, e_i, e_f] = e0;
    let delta = row.delta;
    row.e0_i = e_i;
    row.e0_f = e_f;
    row.avg_work = m.avg_work;
    row.delta_u = m.delta_u;
    row.irr_work = m.irr_work;
    row.variance = m.variance;
    row.avg_work_per_delta = m.avg_work / delta;
    row.irr_per_delta2 = m.irr_work / (delta * delta);
    row.eq2_discrepancy = irr_second_order_check([e_minus, e_i, e_f], delta, m.irr_work).discrepancy;
    if !m.satisfies_clausius() {
        row.flags.push("clausius".into());
    }
}

fn lz_point(plan: &SweepPlan, p: &LzParams, x: f64) -> PointReport {
    let delta = plan.delta;
    let lam_f = x + delta;
    let avg = match lz::average_work(p, x, delta) {
        Ok(v) => v,
        Err(e) => return failed(plan, x, "degenerate", e.to_string()),
    };
    let dist = match lz::work_distribution(p, x, lam_f) {
        Ok(d) => d,
        Err(e) => return failed(plan, x, "solver_failed", e.to_string()),
    };
    let e0 = [
        lz::ground_energy(p, x - delta),
        lz::ground_energy(p, x),
        lz::ground_energy(p, lam_f),
    ];
    let delta_u = e0[2] - e0[1];
    let m = WorkMoments {
        avg_work: avg,
        delta_u,
        irr_work: avg - delta_u,
        variance: dist.variance(),
        commuting_flag: dist.variance() <= work::COMMUTING_VARIANCE,
    };
    let mut row = blank_row(plan, x);
    fill_row(&mut row, e0, &m);
    if (dist.mean() - avg).abs() > FIRST_MOMENT_TOL {
        row.flags.push("first_moment".into());
    }
    let gs_overlap = dist.outcomes().first().map(|o| o.probability);
    PointReport {
        row,
        diagnostics: PointDiagnostics {
            total_probability: Some(dist.total_probability()),
            min_support: dist.min_work(),
            distribution_mean: Some(dist.mean()),
            hf_avg_work: Some(avg),
            gs_overlap,
            sector: None,
            error: None,
        },
        distribution: Some(dist),
    }
}

fn ff_point(plan: &SweepPlan, spec: &ChainSpec, x: f64) -> PointReport {
    let (n, j, delta) = (spec.n_sites, spec.jx, plan.delta);
    let solve = |h: f64| FreeFermionChain::new(n, j, h, Boundary::Open);
    let (minus, init, fin) = match (solve(x - delta), solve(x), solve(x + delta)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return failed(plan, x, "solver_failed", e.to_string()),
    };
    let m = match xx_quench_moments(n, j, x, delta) {
        Ok(m) => m,
        Err(e @ FreeFermionError::ZeroMode { .. }) => return failed(plan, x, "zero_mode", e.to_string()),
        Err(e) => return failed(plan, x, "solver_failed", e.to_string()),
    };
    let mut row = blank_row(plan, x);
    fill_row(
        &mut row,
        [minus.ground_energy, init.ground_energy, fin.ground_energy],
        &m,
    );
    row.flags.push("commuting".into());
    let overlap = if fin.filled == init.filled { 1.0 } else { 0.0 };
    PointReport {
        row,
        distribution: None,
        diagnostics: PointDiagnostics {
            hf_avg_work: Some(m.avg_work),
            gs_overlap: Some(overlap),
            ..PointDiagnostics::default()
        },
    }
}

/// Lowest state of a chain, searched across magnetization sectors when
/// `Σσz` is conserved.
struct ChainGround {
    basis: SpinBasis,
    result: EigenResult,
    /// Set when the lowest two sectors (or the lowest sector internally)
    /// are closer than the degeneracy tolerance.
    degenerate: bool,
}

fn bases(spec: &ChainSpec) -> Result<Vec<SpinBasis>, String> {
    if spec.conserves_magnetization() {
        SpinBasis::sectors(spec.n_sites)
            .map(|m| SpinBasis::new(spec.n_sites, Some(m)).map_err(|e| e.to_string()))
            .collect()
    } else {
        Ok(vec![SpinBasis::full(spec.n_sites).map_err(|e| e.to_string())?])
    }
}

fn chain_ground(spec: &ChainSpec, bases: &[SpinBasis], plan: &SweepPlan) -> Result<ChainGround, String> {
    let mut found: Vec<(usize, EigenResult)> = Vec::with_capacity(bases.len());
    for (k, basis) in bases.iter().enumerate() {
        let h = build_hamiltonian(spec, basis).map_err(|e| e.to_string())?;
        let gs = ground_state(&h, &plan.solver).map_err(|e| e.to_string())?;
        found.push((k, gs));
    }
    found.sort_by(|a, b| a.1.ground_energy().total_cmp(&b.1.ground_energy()));
    let across = found
        .get(1)
        .is_some_and(|second| second.1.ground_energy() - found[0].1.ground_energy() < DEGENERACY_TOL);
    let (k, result) = found.swap_remove(0);
    Ok(ChainGround {
        basis: bases[k].clone(),
        degenerate: across || result.degenerate,
        result,
    })
}

fn ed_point(plan: &SweepPlan, spec: &ChainSpec, x: f64) -> PointReport {
    match ed_point_inner(plan, spec, x) {
        Ok(r) => r,
        Err(e) => failed(plan, x, "solver_failed", e),
    }
}

fn ed_point_inner(plan: &SweepPlan, spec: &ChainSpec, x: f64) -> Result<PointReport, String> {
    let delta = plan.delta;
    let param = plan.param;
    let spec_i = spec.with_param(param, x);
    let spec_f = spec.with_param(param, x + delta);
    let spec_m = spec.with_param(param, x - delta);
    let all = bases(spec)?;

    let init = chain_ground(&spec_i, &all, plan)?;
    let fin = chain_ground(&spec_f, &all, plan)?;
    let minus = chain_ground(&spec_m, &all, plan)?;
    let e_minus = minus.result.ground_energy();

    let basis = &init.basis;
    let v_op = build_potential(&spec_i, param, basis).map_err(|e| e.to_string())?;
    let mut flags = Vec::new();
    if init.degenerate {
        flags.push("degenerate_i".to_string());
    }
    if fin.degenerate {
        flags.push("degenerate_f".to_string());
    }

    let dense = basis.len() <= DENSE_SECTOR_LIMIT;
    // A field quench of a magnetization-conserving chain shifts each sector
    // by a constant; the dense ground vector keeps that quench exactly
    // diagonal, where the Lanczos residual would leak into the variance.
    let commuting = param == QuenchParam::FieldH && spec.conserves_magnetization();
    let (psi0, e_i) = if dense && commuting {
        let h_i = build_hamiltonian(&spec_i, basis).map_err(|e| e.to_string())?;
        let mut initial_spectrum = full_spectrum(&h_i).map_err(|e| e.to_string())?;
        (initial_spectrum.vectors.swap_remove(0), initial_spectrum.energies[0])
    } else {
        (init.result.vectors[0].clone(), init.result.ground_energy())
    };
    let hf = work::average_work_hf(&psi0, &v_op, delta).map_err(|e| e.to_string())?;

    let mut row = blank_row(plan, x);
    let mut diagnostics = PointDiagnostics {
        hf_avg_work: Some(hf),
        sector: basis.sector(),
        ..PointDiagnostics::default()
    };
    let mut distribution = None;
    if dense {
        let h_f = build_hamiltonian(&spec_f, basis).map_err(|e| e.to_string())?;
        let final_spectrum = full_spectrum(&h_f).map_err(|e| e.to_string())?;
        // Prefer the dense energy when the final ground state shares the
        // initial sector, so the support edge and ΔU agree to rounding.
        let same_sector = final_spectrum.energies[0] - fin.result.ground_energy() < DEGENERACY_TOL;
        let e_f = if same_sector {
            final_spectrum.energies[0]
        } else {
            fin.result.ground_energy()
        };
        let delta_u = e_f - e_i;
        let dist = work::work_distribution(&psi0, &final_spectrum, e_i)
            .map_err(|e| e.to_string())?
            .with_ground_level(delta_u);
        let m = moments(&dist, delta_u);
        fill_row(&mut row, [e_minus, e_i, e_f], &m);
        if m.commuting_flag {
            flags.push("commuting".into());
        }
        if (dist.mean() - hf).abs() > FIRST_MOMENT_TOL {
            flags.push("first_moment".into());
        }
        if dist.min_work().is_some_and(|w| (w - delta_u).abs() > SUPPORT_TOL) {
            flags.push("support".into());
        }
        let overlap = if same_sector {
            let d = work::dot(&psi0, &final_spectrum.vectors[0]);
            d * d
        } else {
            0.0
        };
        diagnostics.total_probability = Some(dist.total_probability());
        diagnostics.min_support = dist.min_work();
        diagnostics.distribution_mean = Some(dist.mean());
        diagnostics.gs_overlap = Some(overlap);
        distribution = Some(dist);
    } else {
        // Moments from the initial state alone: with H(λf) = H(λi) + δλ V
        // and ψ0 an eigenstate of H(λi), ⟨W²⟩ − ⟨W⟩² = δλ² Var(V).
        let e_f = fin.result.ground_energy();
        let delta_u = e_f - e_i;
        let v_psi = v_op.apply(&psi0);
        let v2: f64 = v_psi.iter().map(|x| x * x).sum();
        let v1 = hf / delta;
        let variance = delta * delta * (v2 - v1 * v1).max(0.0);
        let m = WorkMoments {
            avg_work: hf,
            delta_u,
            irr_work: hf - delta_u,
            variance,
            commuting_flag: variance <= work::COMMUTING_VARIANCE,
        };
        fill_row(&mut row, [e_minus, e_i, e_f], &m);
        flags.push("hf_only".into());
        let d = work::dot(&psi0, &fin.result.vectors[0]);
        diagnostics.gs_overlap = Some(if fin.basis == *basis { d * d } else { 0.0 });
    }
    row.flags.extend(flags);
    Ok(PointReport {
        row,
        distribution,
        diagnostics,
    })
}
