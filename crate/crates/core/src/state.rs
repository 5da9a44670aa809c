//! Bit-packed subsets of the vertex set.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Vertex;

/// A configuration in `{0,1}^{V_n}`, identified with its support.
///
/// Bits past `n` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    n: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl State {
    pub fn empty(n: usize) -> Self {
        State {
            n,
            words: vec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = State {
            n,
            words: vec![u64::MAX; word_count(n)],
        };
        s.trim();
        s
    }

    pub fn singleton(n: usize, x: Vertex) -> Self {
        let mut s = State::empty(n);
        s.insert(x);
        s
    }

    pub fn from_vertices<I: IntoIterator<Item = Vertex>>(n: usize, it: I) -> Self {
        let mut s = State::empty(n);
        for x in it {
            s.insert(x);
        }
        s
    }

    pub(crate) fn from_words(n: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), word_count(n));
        let mut s = State { n, words };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn contains(&self, x: Vertex) -> bool {
        let x = x as usize;
        debug_assert!(x < self.n);
        (self.words[x >> 6] >> (x & 63)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, x: Vertex) {
        let x = x as usize;
        assert!(x < self.n, "vertex {x} out of range for n = {}", self.n);
        self.words[x >> 6] |= 1 << (x & 63);
    }

    /// Inserts `x`, returning whether it was absent.
    #[inline]
    pub fn insert_new(&mut self, x: Vertex) -> bool {
        let x = x as usize;
        let w = &mut self.words[x >> 6];
        let bit = 1u64 << (x & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, x: Vertex) {
        let x = x as usize;
        self.words[x >> 6] &= !(1 << (x & 63));
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Number of occupied vertices.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersects(&self, other: &State) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &State) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Occupied vertices in increasing order.
    pub fn iter(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        self.iter().collect()
    }

    /// The `k` smallest occupied vertices.
    pub fn first_k(&self, k: usize) -> State {
        let mut out = State::empty(self.n);
        for x in self.iter().take(k) {
            out.insert(x);
        }
        out
    }

    /// Hex dump: byte `i` holds vertices `8i..8i+8`, least significant bit first.
    pub fn to_hex(&self) -> String {
        let nbytes = self.n.div_ceil(8);
        let bytes: Vec<u8> = self
            .words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(n: usize, s: &str) -> Result<State> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Parse(format!("hex state: {e}")))?;
        if bytes.len() != n.div_ceil(8) {
            return Err(Error::Parse(format!(
                "hex state has {} bytes, expected {}",
                bytes.len(),
                n.div_ceil(8)
            )));
        }
        let mut words = vec![0u64; word_count(n)];
        for (i, b) in bytes.iter().enumerate() {
            words[i / 8] |= u64::from(*b) << (8 * (i % 8));
        }
        let s = State::from_words(n, words.clone());
        if s.words != words {
            return Err(Error::Parse("hex state has bits beyond n".into()));
        }
        Ok(s)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State(n={}, ", self.n)?;
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, ")")
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = Vertex;

    #[inline]
    fn next(&mut self) -> Option<Vertex> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some((self.idx * 64 + tz) as Vertex);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_state_has_n_ones() {
        for n in [1, 63, 64, 65, 130] {
            assert_eq!(State::full(n).count(), n);
            assert_eq!(State::full(n).iter().last(), Some((n - 1) as Vertex));
        }
    }

    #[test]
    fn first_k_takes_smallest_ids() {
        let s = State::from_vertices(200, [150, 3, 70, 9]);
        assert_eq!(s.first_k(2).to_vec(), vec![3, 9]);
        assert_eq!(s.first_k(10), s);
    }

    #[test]
    fn hex_layout() {
        let s = State::from_vertices(12, [0, 9]);
        assert_eq!(s.to_hex(), "0102");
        assert_eq!(State::from_hex(12, "0102").unwrap(), s);
        assert!(State::from_hex(12, "01f2").is_err());
        assert!(State::from_hex(12, "01").is_err());
    }
}
