//! SplitMix64, the seeded generator behind every shuffle, sample and
//! dropout mask in the toolkit.
//!
//! The algorithm is fixed so that a seed reproduces the same stream in any
//! implementation. State advances by the golden-gamma constant
//! `0x9E3779B97F4A7C15` and each output is the state passed through the
//! `mix64` finaliser (shifts 30/27/31, multipliers `0xBF58476D1CE4E5B9` and
//! `0x94D049BB133111EB`). Seeded with `1234567` the first outputs are
//! `6457827717110365317, 3203168211198807973, 9817491932198370423`.
//!
//! Derived quantities:
//! - `next_f64`: top 53 bits scaled by 2^-53, uniform on [0, 1).
//! - `below(n)`: `(next_u64() as u128 * n as u128) >> 64` (multiply-shift).
//! - `shuffle`: Fisher–Yates from the last index down, swapping `i` with
//!   `below(i + 1)`.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform real in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// The SplitMix64 output finaliser; also handy for deriving child seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministically combine a base seed with a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_add(GOLDEN_GAMMA)))
}
