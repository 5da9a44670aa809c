//! The receive-input variables `B^x_t` as a random-access field.
//!
//! Each `(t, x)` owns one 64-bit word of a ChaCha8 keystream: stream `t`,
//! word `x`. A bit is `1` when that uniform word falls below `q * 2^64`, so
//! the same field re-thresholded at a larger `q` only turns zeros into ones.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::state::State;

#[derive(Clone, Debug)]
pub struct NoiseField {
    q: f64,
    seed: u64,
    threshold: Threshold,
    base: ChaCha8Rng,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Threshold {
    Never,
    Below(u64),
    Always,
}

impl Threshold {
    fn from_q(q: f64) -> Self {
        if q <= 0.0 {
            Threshold::Never
        } else if q >= 1.0 {
            Threshold::Always
        } else {
            // q * 2^64, exact up to f64 rounding of q itself
            Threshold::Below((q * 18_446_744_073_709_551_616.0) as u64)
        }
    }

    #[inline]
    fn accepts(self, u: u64) -> bool {
        match self {
            Threshold::Never => false,
            Threshold::Always => true,
            Threshold::Below(b) => u < b,
        }
    }
}

impl NoiseField {
    pub fn new(q: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::precondition(format!("q = {q} is not a probability")));
        }
        Ok(NoiseField {
            q,
            seed,
            threshold: Threshold::from_q(q),
            base: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The same underlying uniforms thresholded at a different `q`.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        NoiseField::new(q, self.seed)
    }

    #[inline]
    fn cursor(&self, t: u64, x: usize) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(t);
        rng.set_word_pos(2 * x as u128);
        rng
    }

    /// The uniform word behind `B^x_t`.
    pub fn uniform(&self, t: u64, x: Vertex) -> u64 {
        self.cursor(t, x as usize).next_u64()
    }

    /// `B^x_t`.
    #[inline]
    pub fn bit(&self, t: u64, x: Vertex) -> bool {
        match self.threshold {
            Threshold::Never => false,
            Threshold::Always => true,
            th => th.accepts(self.uniform(t, x)),
        }
    }

    /// All of column `t` for vertices `0..n` as a packed state.
    pub fn column(&self, t: u64, n: usize) -> State {
        match self.threshold {
            Threshold::Never => return State::empty(n),
            Threshold::Always => return State::full(n),
            Threshold::Below(_) => {}
        }
        let mut rng = self.cursor(t, 0);
        let mut out = State::empty(n);
        let th = self.threshold;
        for (wi, word) in out.words_mut().iter_mut().enumerate() {
            let lim = (n - wi * 64).min(64);
            let mut w = 0u64;
            for b in 0..lim {
                if th.accepts(rng.next_u64()) {
                    w |= 1 << b;
                }
            }
            *word = w;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_matches_random_access() {
        let f = NoiseField::new(0.37, 9).unwrap();
        let col = f.column(5, 200);
        for x in 0..200 {
            assert_eq!(col.contains(x), f.bit(5, x), "x = {x}");
        }
    }

    #[test]
    fn extreme_q() {
        let zero = NoiseField::new(0.0, 1).unwrap();
        let one = NoiseField::new(1.0, 1).unwrap();
        assert!((0..100).all(|x| !zero.bit(3, x) && one.bit(3, x)));
        assert!(NoiseField::new(1.5, 1).is_err());
    }

    #[test]
    fn rethresholding_is_monotone() {
        let lo = NoiseField::new(0.3, 77).unwrap();
        let hi = lo.with_q(0.6).unwrap();
        for t in 0..20 {
            assert!(lo.column(t, 300).is_subset(&hi.column(t, 300)));
        }
    }

    #[test]
    fn marginal_frequency_near_q() {
        let q = 0.3;
        let f = NoiseField::new(q, 2024).unwrap();
        let trials = 200 * 500;
        let ones: usize = (0..200).map(|t| f.column(t, 500).count()).sum();
        let p = ones as f64 / trials as f64;
        let se = (q * (1.0 - q) / trials as f64).sqrt();
        assert!((p - q).abs() < 4.0 * se, "p = {p}");
    }
}
