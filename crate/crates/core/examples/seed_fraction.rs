//! Fraction of roots whose dual exceeds n^b members after ⌈a log n⌉ steps.

use threshold_contact::experiments::seed_fraction_experiment;
use threshold_contact::ExperimentConfig;

fn main() -> threshold_contact::Result<()> {
    for q in [0.4, 0.6, 0.75, 1.0] {
        let cfg = ExperimentConfig { q, r: 2, n: 10_000, ..Default::default() };
        let res = seed_fraction_experiment(&cfg)?;
        println!(
            "q={q}: {} steps, threshold {:.0}, fraction {:.4}",
            res.steps, res.threshold, res.fraction
        );
    }
    Ok(())
}
