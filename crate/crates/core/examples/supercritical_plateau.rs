//! Density of the process from full occupancy settles at the branching
//! survival probability.

use threshold_contact::experiments::density_plateau;
use threshold_contact::theory::{rho, OffspringLaw, DEFAULT_RHO_TOL};
use threshold_contact::ExperimentConfig;

fn main() -> threshold_contact::Result<()> {
    for (q, r) in [(0.75, 2), (0.6, 3), (0.9, 2)] {
        let cfg = ExperimentConfig { q, r, n: 10_000, trials: 10, t_max: 500, ..Default::default() };
        let res = density_plateau(&cfg)?;
        let target = rho(OffspringLaw::new(q, r)?, DEFAULT_RHO_TOL);
        println!(
            "q={q} r={r}: density {:.4} over [{}, {}], rho {target:.4}, died early {}",
            res.mean_density, res.window.0, res.window.1, res.died_early
        );
    }
    Ok(())
}
