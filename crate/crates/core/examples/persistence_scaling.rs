//! Extinction time from full occupancy grows exponentially in n when qr > 1.
//!
//! cargo run --release --example persistence_scaling

use threshold_contact::experiments::{persistence_experiment, PersistenceRecord};
use threshold_contact::ExperimentConfig;

fn main() -> threshold_contact::Result<()> {
    let cfg = ExperimentConfig {
        q: 0.75,
        r: 2,
        n_grid: vec![5, 10, 15, 20],
        trials: 100,
        t_max: 1_000_000,
        ..Default::default()
    };
    let recs = persistence_experiment(&cfg)?;
    let mut prev: Option<f64> = None;
    for &n in &cfg.n_grid {
        let median = PersistenceRecord::median_extinction(&recs, n);
        let censored = recs.iter().filter(|r| r.n == n && r.censored).count();
        match (median, prev) {
            (Some(m), Some(p)) => println!("n={n:>3} median {m:>10} ln-slope per 5 sites {:.2} censored {censored}", (m / p).ln()),
            (Some(m), None) => println!("n={n:>3} median {m:>10} censored {censored}"),
            (None, _) => println!("n={n:>3} median beyond {} censored {censored}", cfg.t_max),
        }
        prev = median;
    }
    Ok(())
}
