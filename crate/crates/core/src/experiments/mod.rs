//! Seeded experiments confronting the simulator with the theory.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]:
//! replicates draw their graph and noise seeds from `(seed, label, n, replicate)`
//! and results are collected in replicate order whatever the thread count.

mod growth;
mod ladder;
mod persistence;
mod psi_ones;
mod seed_fraction;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Vertex;

pub use growth::{growth_experiment, GrowthResult, GrowthRow};
pub use ladder::{
    ladder_experiment, proof_ladder, LadderSummary, LadderTrace, Rung, Termination,
};
pub use persistence::{
    density_plateau, persistence_experiment, subcritical_experiment, PersistenceRecord,
    PlateauReplicate, PlateauResult, SubcriticalSummary,
};
pub use psi_ones::{psi_ones_experiment, PairStat, PositionStat, PsiOnesResult};
pub use seed_fraction::{seed_fraction_experiment, SeedFractionResult};

/// A uniformly random sorted `k`-subset of `0..n`.
pub fn random_subset(n: usize, k: usize, seed: u64) -> Vec<Vertex> {
    assert!(k <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if 2 * k > n {
        let mut all: Vec<Vertex> = (0..n as Vertex).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            all.swap(i, j);
        }
        let mut out = all[..k].to_vec();
        out.sort_unstable();
        return out;
    }
    let mut set = BTreeSet::new();
    while set.len() < k {
        set.insert(rng.random_range(0..n as Vertex));
    }
    set.into_iter().collect()
}

/// Standard error of a frequency `p` over `trials`.
pub fn frequency_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Median of `values`, averaging the two middle entries for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_subset_is_sorted_and_distinct() {
        for (n, k) in [(10, 10), (100, 3), (50, 40)] {
            let s = random_subset(n, k, 5);
            assert_eq!(s.len(), k);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&x| (x as usize) < n));
        }
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
