//! Portable seeded pseudorandom number generator.
//!
//! Certificates and reports embed seeds, so the generator must produce the
//! same stream on every platform and in every release. We therefore fix the
//! algorithm to splitmix64 and write it out in full rather than depending on
//! an external RNG crate whose stream could change:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! All arithmetic is wrapping 64-bit. A sign is the top bit of an output
//! word; a bounded draw reduces an output word modulo the bound (used only
//! for sampling, where the O(2^-64) modulo bias is irrelevant).

/// Splitmix64 generator with the fixed increment and mixing constants above.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform sign: +1.0 when the top output bit is clear, -1.0 otherwise.
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Draw from `0..bound` by modulo reduction (sampling paths only).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }
}
