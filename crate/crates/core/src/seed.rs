//! Derivation of independent seed streams from a single root seed.
//!
//! Every random component (graph, primal noise, dual noise, sampling of
//! initial sets) takes its seed from `derive(root, label, index)`. Labels are
//! stable strings so that adding a new stream never shifts existing ones.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Seed for the stream `(label, index)` under `root`.
pub fn derive(root: u64, label: &str, index: u64) -> u64 {
    let a = mix64(root.wrapping_add(GOLDEN));
    let b = mix64(a ^ label_hash(label));
    mix64(b.wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// Seed for a stream keyed by two indices, e.g. `(n, replicate)`.
pub fn derive2(root: u64, label: &str, i: u64, j: u64) -> u64 {
    derive(derive(root, label, i), label, j)
}
