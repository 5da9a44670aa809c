//! Below criticality the process dies in logarithmic time.

use threshold_contact::experiments::subcritical_experiment;
use threshold_contact::ExperimentConfig;

fn main() -> threshold_contact::Result<()> {
    let cfg = ExperimentConfig {
        q: 0.4,
        r: 2,
        n_grid: vec![1_000, 10_000, 100_000],
        trials: 50,
        t_max: 500,
        ..Default::default()
    };
    let res = subcritical_experiment(&cfg)?;
    for (n, m) in &res.medians {
        let model = (*n as f64).ln() / (1.0 / 0.8f64).ln();
        println!("n={n:>7} median {:?} (log n / log(1/qr) = {model:.1})", m);
    }
    println!("all extinct: {}, sublinear: {}", res.all_extinct, res.is_sublinear());
    Ok(())
}
