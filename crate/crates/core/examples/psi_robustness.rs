//! Collision configurations `ψ(A)` on the forest `T_m`: how many marks random
//! sets collect, and how the sufficient robustness check compares with the
//! exhaustive one on a small instance.

use threshold_contact::experiments::random_subset;
use threshold_contact::psi::{
    build_psi, default_params, is_robust_exact, is_robust_sufficient, PsiConfig, PsiParams, Robustness, Shape,
};
use threshold_contact::{GraphConfig, LazyGraph};

fn main() -> threshold_contact::Result<()> {
    let params = PsiParams { q_tilde: 0.745, delta: 0.02, g: 3 };
    params.validate(0.75, 2)?;
    for n in [10_000usize, 100_000, 1_000_000] {
        let graph = LazyGraph::new(GraphConfig::new(n, 2, 4)?)?;
        for m in [10usize, 40] {
            let a = random_subset(n, m, 9);
            let psi = build_psi(&a, &graph, &params)?;
            println!(
                "n={n:>8} m={m:>3} |T_m|={:>5} d={:>3} sufficient={}",
                psi.shape().len(),
                psi.ones(),
                is_robust_sufficient(&psi, &params)
            );
        }
    }

    // a handcrafted configuration small enough for exhaustive search
    let base = default_params(0.75, 2)?;
    let small = PsiParams { g: 2, ..base };
    let shape = Shape::new(2, 2, 2)?;
    let mut bits = vec![false; shape.len()];
    bits[shape.level_start(2)..].fill(true);
    let psi = PsiConfig::from_bits(shape, &bits)?;
    match is_robust_exact(&psi, &small, 24)? {
        Robustness::Robust => println!("all leaves marked: robust"),
        Robustness::NotRobust { counterexample } => {
            println!("all leaves marked: not robust; admissible family that is not good:");
            for (j, level) in counterexample.levels.iter().enumerate() {
                let shown: Vec<String> = level.iter().map(|&p| shape.index(p).to_string()).collect();
                println!("  B_{j} = {{{}}}", shown.join(", "));
            }
        }
    }
    Ok(())
}
