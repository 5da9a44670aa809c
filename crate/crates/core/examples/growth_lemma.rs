//! Free dual growth from sets whose collision configuration passes the
//! sufficient robustness check.
//!
//! Failures of `|ξ̂^A_g| >= (1+δ)m` are rare already at m = 5; the grid below
//! starts small so some are visible.

use threshold_contact::experiments::growth_experiment;
use threshold_contact::ExperimentConfig;

fn main() -> threshold_contact::Result<()> {
    let cfg = ExperimentConfig {
        q: 0.75,
        r: 2,
        n: 100_000,
        m_grid: vec![1, 2, 3, 5, 10, 20],
        trials: 5000,
        q_tilde: Some(0.745),
        delta: Some(0.02),
        g: Some(3),
        ..Default::default()
    };
    let res = growth_experiment(&cfg)?;
    println!("q_tilde={} delta={} g={}", res.params.q_tilde, res.params.delta, res.params.g);
    for row in &res.rows {
        println!(
            "m={:>3} accepted {:>5}/{:<5} failures {:>5} ({:.5}) inequality violations {}",
            row.m, row.accepted, row.attempts, row.failures, row.failure_frequency, row.inequality_violations
        );
    }
    Ok(())
}
