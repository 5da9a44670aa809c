//! Branching-process survival, the Chernoff rate `γ`, and a branching oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

pub const DEFAULT_RHO_TOL: f64 = 1e-12;

/// Offspring law: `r` children with probability `q`, none otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffspringLaw {
    pub q: f64,
    pub r: usize,
}

impl OffspringLaw {
    pub fn new(q: f64, r: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::precondition(format!("q = {q} is not a probability")));
        }
        if r == 0 {
            return Err(Error::precondition("r must be at least 1"));
        }
        Ok(OffspringLaw { q, r })
    }

    pub fn mean(&self) -> f64 {
        self.q * self.r as f64
    }

    /// Generating function `f(s) = (1 - q) + q s^r`.
    pub fn pgf(&self, s: f64) -> f64 {
        (1.0 - self.q) + self.q * s.powi(self.r as i32)
    }
}

/// Survival probability `ρ = 1 - σ*`, with `σ*` the smallest fixed point of the
/// generating function in `[0, 1]`.
///
/// Bisection on `h(σ) = f(σ) - σ`: `h(0) = 1 - q > 0` and, when `qr > 1`,
/// `h < 0` just below 1.
pub fn rho(law: OffspringLaw, tol: f64) -> f64 {
    // q = 1 never dies, including the degenerate r = 1 line
    if law.q >= 1.0 {
        return 1.0;
    }
    if law.mean() <= 1.0 {
        return 0.0;
    }
    let h = |s: f64| law.pgf(s) - s;
    let mut eps = 0.5f64;
    while h(1.0 - eps) >= 0.0 {
        eps /= 2.0;
        if eps < f64::EPSILON {
            return 0.0;
        }
    }
    let (mut lo, mut hi) = (0.0f64, 1.0 - eps);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1.0 - 0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchingSample {
    /// Fraction of trials alive at the final generation.
    pub survival_frequency: f64,
    /// `populations[trial][t]` for `t = 0..=generations`, saturating at `u64::MAX`.
    pub populations: Vec<Vec<u64>>,
}

impl BranchingSample {
    pub fn mean_population(&self, t: usize) -> f64 {
        let s: f64 = self.populations.iter().map(|p| p[t] as f64).sum();
        s / self.populations.len() as f64
    }
}

/// Monte Carlo of the branching process from one ancestor.
///
/// Each generation is `r · Bin(Z_t, q)`.
pub fn simulate_branching(
    law: OffspringLaw,
    generations: usize,
    trials: usize,
    seed: u64,
) -> Result<BranchingSample> {
    if generations == 0 || trials == 0 {
        return Err(Error::precondition("generations and trials must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = law.r as u64;
    let mut populations = Vec::with_capacity(trials);
    let mut alive = 0usize;
    for _ in 0..trials {
        let mut pops = Vec::with_capacity(generations + 1);
        let mut z: u64 = 1;
        pops.push(z);
        for _ in 0..generations {
            if z > 0 {
                let births = Binomial::new(z, law.q)
                    .expect("q validated")
                    .sample(&mut rng);
                z = births.saturating_mul(r);
            }
            pops.push(z);
        }
        if z > 0 {
            alive += 1;
        }
        populations.push(pops);
    }
    Ok(BranchingSample {
        survival_frequency: alive as f64 / trials as f64,
        populations,
    })
}

/// `γ(x) = x ln x - x + 1`, natural logarithm.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::precondition(format!("gamma needs x > 0, got {x}")));
    }
    Ok(x * x.ln() - x + 1.0)
}

/// `exp(-γ(x) k p)`, an upper bound on `P(Bin(k, p) < x k p)` for `x ∈ (0, 1)`.
pub fn binomial_lower_tail_bound(k: u64, p: f64, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::precondition("k must be at least 1"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::precondition(format!("p = {p} must lie in (0, 1]")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::precondition(format!("x = {x} must lie in (0, 1)")));
    }
    Ok((-gamma_fn(x)? * k as f64 * p).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_closed_forms() {
        let l = |q, r| OffspringLaw::new(q, r).unwrap();
        assert_eq!(rho(l(0.5, 2), 1e-12), 0.0);
        assert!((rho(l(0.75, 2), 1e-12) - 2.0 / 3.0).abs() < 1e-10);
        let sigma = (-0.6 + 1.32f64.sqrt()) / 1.2;
        assert!((rho(l(0.6, 3), 1e-12) - (1.0 - sigma)).abs() < 1e-10);
        assert_eq!(rho(l(1.0, 1), 1e-12), 1.0);
        assert_eq!(rho(l(1.0, 3), 1e-12), 1.0);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_fn(1.0).unwrap(), 0.0);
        assert!((gamma_fn(0.5).unwrap() - 0.153_426_4).abs() < 1e-7);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.0).is_err());
    }

    #[test]
    fn bound_preconditions() {
        assert!(binomial_lower_tail_bound(0, 0.5, 0.5).is_err());
        assert!(binomial_lower_tail_bound(5, 0.0, 0.5).is_err());
        assert!(binomial_lower_tail_bound(5, 0.5, 1.0).is_err());
        let near_one = binomial_lower_tail_bound(10, 0.5, 1.0 - 1e-9).unwrap();
        assert!((near_one - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_branching() {
        let s = simulate_branching(OffspringLaw::new(0.0, 2).unwrap(), 3, 50, 1).unwrap();
        assert_eq!(s.survival_frequency, 0.0);
        let s = simulate_branching(OffspringLaw::new(1.0, 3).unwrap(), 5, 10, 1).unwrap();
        assert_eq!(s.survival_frequency, 1.0);
        assert!(s.populations.iter().all(|p| p[5] == 243));
    }
}
