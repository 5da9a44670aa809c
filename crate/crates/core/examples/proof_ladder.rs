//! Rung-by-rung trace of the persistence argument from single roots.

use threshold_contact::experiments::ladder_experiment;
use threshold_contact::ExperimentConfig;

fn main() -> threshold_contact::Result<()> {
    let cfg = ExperimentConfig {
        q: 0.75,
        r: 2,
        n: 10_000,
        b: 0.4,
        q_tilde: Some(0.745),
        delta: Some(0.02),
        g: Some(3),
        roots: 1000,
        ..Default::default()
    };
    let res = ladder_experiment(&cfg)?;
    println!(
        "{} roots, {} seeded, sustained 10 rungs: {:.4}",
        res.traces.len(),
        res.seeded(),
        res.sustained_fraction(10)
    );
    let mut ends = std::collections::BTreeMap::new();
    for t in &res.traces {
        *ends.entry(t.termination.label()).or_insert(0) += 1;
    }
    println!("terminations: {ends:?}");
    if let Some(t) = res.traces.iter().find(|t| t.seeded()) {
        println!("root {}:", t.root);
        for r in t.rungs.iter().take(12) {
            println!(
                "  rung {:>3} s={:>3} alpha={:?} |zeta|={:>4} descendants={:>5} H={}",
                r.index, r.time, r.alpha, r.zeta_size, r.descendants, r.h
            );
        }
    }
    Ok(())
}
