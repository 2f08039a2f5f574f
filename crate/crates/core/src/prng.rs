//! Deterministic pseudo-random numbers for benchmark perturbations.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood's 64-bit mixer, public
//! domain): the state walks the Weyl sequence `state += 0x9E3779B97F4A7C15`
//! and each output is the finalizer
//!
//! ```text
//! z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27;  z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! It is hand-rolled (eleven lines) rather than pulled from a crate so that
//! the exact byte-for-byte stream — and with it every perturbed initial
//! datum — is pinned by this file alone, independent of external version
//! bumps. Uniform doubles take the top 53 bits: `(x >> 11) · 2⁻⁵³`, giving
//! values in [0, 1).

/// SplitMix64 stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next 64 uniform bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
