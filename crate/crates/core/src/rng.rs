//! Deterministic, splittable random streams.
//!
//! A stream is identified by `(seed, stream_id)` and backed by the ChaCha12
//! block function: the seed expands to the cipher key and the stream id selects
//! the 64-bit ChaCha stream, so distinct ids yield distinct keystreams over the
//! same key. Output is a pure function of `(seed, stream_id, counter)`, which
//! makes replica-parallel runs independent of scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// A reproducible random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

/// Creates the stream `(seed, stream_id)` positioned at counter 0.
pub fn make_stream(seed: u64, stream_id: u64) -> RngStream {
    RngStream::new(seed, stream_id)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u64 {
        self.inner.get_word_pos() as u64
    }

    /// Derives the child stream for `lane`. The child depends only on
    /// `(seed, stream_id, lane)`, never on how far this stream has advanced.
    pub fn split(&self, lane: u64) -> RngStream {
        let child = splitmix64(self.stream_id ^ splitmix64(lane.wrapping_add(0x5EED)));
        RngStream::new(self.seed, child)
    }

    /// Uniform draw on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn normal_vector(&mut self, dim: usize) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_fn(dim, |_, _| self.standard_normal())
    }

    /// Uniform integer on `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Uniformly distributed unit vector in `dim` dimensions.
    pub fn unit_vector(&mut self, dim: usize) -> nalgebra::DVector<f64> {
        loop {
            let v = self.normal_vector(dim);
            let n = v.norm();
            if n > 1e-300 {
                return v / n;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
