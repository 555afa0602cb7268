//! Deterministic, splittable random streams.
//!
//! Every stream is a ChaCha8 block cipher keyed by the root seed and
//! positioned on its own 64-bit stream id, so substreams are independent,
//! cost nothing to create and never depend on how work is scheduled.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A single-owner random stream identified by `(root_seed, substream_id)`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    root_seed: u64,
    substream_id: u64,
    draw_counter: u64,
    rng: ChaCha8Rng,
}

/// Creates the stream for `(root_seed, substream_id)` at draw counter 0.
pub fn make_stream(root_seed: u64, substream_id: u64) -> RandomStream {
    RandomStream::new(root_seed, substream_id)
}

impl RandomStream {
    pub fn new(root_seed: u64, substream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
        rng.set_stream(substream_id);
        Self {
            root_seed,
            substream_id,
            draw_counter: 0,
            rng,
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn substream_id(&self) -> u64 {
        self.substream_id
    }

    /// Number of primitive draws taken so far.
    pub fn draw_counter(&self) -> u64 {
        self.draw_counter
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        self.draw_counter += 1;
        self.rng.gen::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open_unit(&mut self) -> f64 {
        loop {
            let u = self.next_unit();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draw_counter += 1;
        self.rng.next_u64()
    }

    /// Uniform integer in `0..n`. `n` must be nonzero.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.draw_counter += 1;
        self.rng.gen_range(0..n)
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> Result<f64> {
        sample_uniform(self, a, b)
    }

    pub fn exponential(&mut self, rate: f64) -> Result<f64> {
        sample_exponential(self, rate)
    }

    /// Exp(1) variate by inversion.
    pub fn standard_exponential(&mut self) -> f64 {
        exp_from_unit(self.next_unit())
    }

    /// Standard normal variate (Box-Muller, one draw per pair discarded).
    pub fn standard_normal(&mut self) -> f64 {
        let u = self.next_open_unit();
        let v = self.next_unit();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }
}

/// Mixes a salt into a root seed (SplitMix64 finalizer) so independent
/// checks inside one experiment draw from unrelated key spaces.
pub fn derive_seed(root_seed: u64, salt: u64) -> u64 {
    let mut z = root_seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps `U ∈ [0,1)` to an Exp(1) variate as `-ln(1-U)`.
#[inline]
pub fn exp_from_unit(u: f64) -> f64 {
    -(-u).ln_1p()
}

/// Uniform variate on `[a, b)`.
pub fn sample_uniform(stream: &mut RandomStream, a: f64, b: f64) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    let u = stream.next_unit();
    let x = a + (b - a) * u;
    // rounding can land exactly on b for wide intervals
    Ok(if x < b { x } else { a })
}

/// Exp(rate) variate by inversion, strictly positive.
pub fn sample_exponential(stream: &mut RandomStream, rate: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidRate(rate));
    }
    loop {
        let x = exp_from_unit(stream.next_unit()) / rate;
        if x > 0.0 {
            return Ok(x);
        }
    }
}
