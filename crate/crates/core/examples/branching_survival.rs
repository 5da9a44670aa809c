//! Survival probability of the offspring law "r children with probability q",
//! against Monte Carlo.

use threshold_contact::theory::{rho, simulate_branching, OffspringLaw, DEFAULT_RHO_TOL};

fn main() -> threshold_contact::Result<()> {
    println!("{:>5} {:>3} {:>10} {:>10} {:>8}", "q", "r", "rho", "mc", "se");
    for (q, r) in [(0.4, 2), (0.5, 2), (0.6, 2), (0.75, 2), (0.9, 2), (0.6, 3), (0.3, 5)] {
        let law = OffspringLaw::new(q, r)?;
        let exact = rho(law, DEFAULT_RHO_TOL);
        let trials = 20_000;
        let mc = simulate_branching(law, 30, trials, 1)?;
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        println!(
            "{q:>5} {r:>3} {exact:>10.6} {:>10.6} {se:>8.5}",
            mc.survival_frequency
        );
    }
    Ok(())
}
