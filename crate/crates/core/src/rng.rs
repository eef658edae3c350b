//! Seeded random streams.
//!
//! SplitMix64 is used everywhere so that a run can be replayed by any
//! implementation that follows the same recipe:
//!
//! * `next_u64`: `state += 0x9E3779B97F4A7C15`, then the SplitMix64 finalizer.
//! * `next_unit_float`: `(next_u64() >> 11) * 2^-53`, uniform in `[0, 1)`.
//! * `bernoulli(p)`: `next_unit_float() < p`.
//! * `next_below(n)`: Lemire's multiply-shift with rejection.
//! * trial seeds: `mix64(master + (index + 1) * 0x9E3779B97F4A7C15)`.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under master seed `master`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub trait RandomStream {
    fn next_u64(&mut self) -> u64;

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    fn next_unit_float(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// True with probability `p`; exact for `p = 0` and `p = 1`.
    #[inline]
    fn bernoulli(&mut self, p: f64) -> bool {
        self.next_unit_float() < p
    }

    /// Uniform in `0..n`. Panics if `n == 0`.
    #[inline]
    fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

impl<R: RandomStream + ?Sized> RandomStream for &mut R {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        (**self).next_u64()
    }
    #[inline]
    fn next_unit_float(&mut self) -> f64 {
        (**self).next_unit_float()
    }
    #[inline]
    fn bernoulli(&mut self, p: f64) -> bool {
        (**self).bernoulli(p)
    }
    #[inline]
    fn next_below(&mut self, n: u64) -> u64 {
        (**self).next_below(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream for trial `index` of a run seeded with `master`.
    pub fn for_trial(master: u64, index: u64) -> Self {
        SplitMix64::new(derive_seed(master, index))
    }
}

impl RandomStream for SplitMix64 {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }
}

/// Wraps a stream and counts logical draws (one per `bernoulli`,
/// `next_unit_float` or `next_below` call, whatever the rejections).
#[derive(Clone, Debug)]
pub struct CountingStream<R> {
    inner: R,
    draws: u64,
}

impl<R: RandomStream> CountingStream<R> {
    pub fn new(inner: R) -> Self {
        CountingStream { inner, draws: 0 }
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn reset(&mut self) {
        self.draws = 0;
    }

    pub fn into_inner(self) -> R {
        self.inner
    }
}

impl<R: RandomStream> RandomStream for CountingStream<R> {
    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }
    fn next_unit_float(&mut self) -> f64 {
        self.draws += 1;
        self.inner.next_unit_float()
    }
    fn bernoulli(&mut self, p: f64) -> bool {
        self.draws += 1;
        self.inner.bernoulli(p)
    }
    fn next_below(&mut self, n: u64) -> u64 {
        self.draws += 1;
        self.inner.next_below(n)
    }
}

/// Fisher-Yates shuffle drawing positions `k-1` down to `1`.
pub fn shuffle<T, R: RandomStream + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}
