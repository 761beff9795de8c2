//! Counter-based random numbers.
//!
//! Every variate is addressed by `(seed, stream, index)`: the ChaCha key comes from
//! the seed, the ChaCha stream id from `stream`, and the block counter from the
//! index. Draw `j` of a stream is therefore the same no matter how many draws are
//! requested or which worker asks for it.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

/// Stream namespaces, so that different kinds of draws never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamKind {
    Phases = 1,
    Gaussians = 2,
    BlockFill = 3,
    Coupling = 4,
    Reference = 5,
    Auxiliary = 6,
}

/// Compose a stream id from a namespace and a realization index.
pub fn stream_id(kind: StreamKind, index: u64) -> u64 {
    ((kind as u64) << 48) | (index & ((1 << 48) - 1))
}

/// Sequential reader over one keyed stream.
pub struct StreamRng {
    inner: ChaCha12Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng { inner }
    }

    /// Position the reader at 64-bit word `index` of the stream.
    pub fn at(seed: u64, stream: u64, index: u64) -> Self {
        let mut s = Self::new(seed, stream);
        s.inner.set_word_pos(2 * index as u128);
        s
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A pair of independent standard normals (Box-Muller, two words).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        (r * c, r * s)
    }

    pub fn normal(&mut self) -> f64 {
        self.normal_pair().0
    }

    /// Uniform integer in 0..n (n > 0), by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let v = self.inner.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}
