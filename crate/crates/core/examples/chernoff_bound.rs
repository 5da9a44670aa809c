//! The binomial lower-tail bound `P(Bin(k, p) < xkp) <= exp(-γ(x) kp)` next
//! to the exact tail.

use threshold_contact::theory::{binomial_lower_tail_bound, gamma_fn};

fn exact_lower_tail(k: u64, p: f64, cut: f64) -> f64 {
    let mut total = 0.0;
    let mut log_c = 0.0f64;
    for j in 0..=k {
        if j as f64 >= cut {
            break;
        }
        total += (log_c + j as f64 * p.ln() + (k - j) as f64 * (1.0 - p).ln()).exp();
        log_c += ((k - j) as f64).ln() - ((j + 1) as f64).ln();
    }
    total
}

fn main() -> threshold_contact::Result<()> {
    println!("gamma(0.5) = {:.7}, gamma(0.9) = {:.7}", gamma_fn(0.5)?, gamma_fn(0.9)?);
    println!("{:>5} {:>5} {:>5} {:>12} {:>12}", "k", "p", "x", "exact", "bound");
    for k in [10u64, 30, 100, 1000] {
        for p in [0.3, 0.5] {
            for x in [0.5, 0.9] {
                let exact = exact_lower_tail(k, p, x * k as f64 * p);
                let bound = binomial_lower_tail_bound(k, p, x)?;
                println!("{k:>5} {p:>5} {x:>5} {exact:>12.4e} {bound:>12.4e}");
            }
        }
    }
    Ok(())
}
