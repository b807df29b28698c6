//! Acceptance gate: one test per criterion, each printing a single
//! `PASS`/`FAIL` line. Run with `--nocapture` to see the report.
//!
//! The chain sweeps are shared through one [`Suite`], so the expensive
//! XXZ runs happen once regardless of which tests touch them.

use std::sync::OnceLock;

use quenchlab::verify::{CheckOutcome, Suite};

fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(Suite::new)
}

fn gate(index: u32, outcome: CheckOutcome) {
    println!("[{index}] {outcome}");
    assert!(outcome.passed, "criterion {index} failed: {}", outcome.detail);
}

#[test]
fn criterion_1_lz_latent_jump() {
    gate(1, suite().lz_latent_jump());
}

#[test]
fn criterion_2_lz_avoided_crossing_divergence() {
    gate(2, suite().lz_avoided_crossing_divergence());
}

#[test]
fn criterion_3_second_order_error_scaling() {
    gate(3, suite().second_order_error_scaling());
}

#[test]
fn criterion_4_xxz_first_order_jump() {
    gate(4, suite().xxz_first_order_jump());
}

#[test]
fn criterion_5_ferro_adiabaticity() {
    gate(5, suite().ferro_adiabaticity());
}

#[test]
fn criterion_6_bkt_null_signal() {
    gate(6, suite().bkt_null_signal());
}

#[test]
fn criterion_7_xx_critical_peak() {
    gate(7, suite().xx_critical_peak());
}

#[test]
fn criterion_8_oracle_equivalence() {
    gate(8, suite().oracle_equivalence());
}

#[test]
fn criterion_9_universal_invariants() {
    gate(9, suite().universal_invariants(quenchlab::verify::Level::Full));
}
