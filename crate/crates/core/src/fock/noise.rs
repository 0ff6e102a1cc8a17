//! Gaussian white-noise realizations in Fourier space.
//!
//! Randomness is counter-based: every mode `k` owns a ChaCha stream keyed by
//! `(seed, k)`, so a given seed produces the same values for the same momentum
//! on every lattice that contains it.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::lattice::{LatticeSpec, Momentum};

/// Fourier coefficients `η̂(k)` of a spatial white noise, Hermitian-paired.
#[derive(Clone, Debug)]
pub struct NoiseRealization {
    pub spec: Arc<LatticeSpec>,
    pub values: Vec<Complex64>,
}

impl NoiseRealization {
    /// Wraps given mode values; the caller guarantees Hermitian symmetry.
    pub fn from_values(spec: Arc<LatticeSpec>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), spec.len());
        NoiseRealization { spec, values }
    }
}

fn stream_key(k: Momentum) -> u64 {
    ((k.k1 as u32 as u64) << 32) | (k.k2 as u32 as u64)
}

/// Stream reserved for the zero mode.
const ZERO_MODE_STREAM: u64 = u64::MAX;

/// One independent Gaussian stream per half-lattice mode plus one for the zero mode.
#[derive(Clone, Debug)]
pub struct ModeStreams {
    spec: Arc<LatticeSpec>,
    streams: Vec<ChaCha8Rng>,
    zero: ChaCha8Rng,
}

impl ModeStreams {
    pub fn new(spec: Arc<LatticeSpec>, seed: u64) -> Self {
        let make = |key: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(key);
            r
        };
        let streams = spec.half_lattice().iter().map(|&i| make(stream_key(spec.mode(i)))).collect();
        ModeStreams { zero: make(ZERO_MODE_STREAM), spec, streams }
    }

    /// Fills `out` with Hermitian-paired complex Gaussians, `Var(Re) = Var(Im) = var(k)/2`.
    pub fn fill_complex(&mut self, out: &mut [Complex64], var: impl Fn(usize) -> f64) {
        for (s, &i) in self.streams.iter_mut().zip(self.spec.half_lattice()) {
            let sd = (0.5 * var(i)).sqrt();
            let re: f64 = StandardNormal.sample(s);
            let im: f64 = StandardNormal.sample(s);
            let z = Complex64::new(sd * re, sd * im);
            out[i] = z;
            out[self.spec.neg(i)] = z.conj();
        }
    }

    /// Standard normal draw from the zero-mode stream.
    pub fn zero_mode(&mut self) -> f64 {
        StandardNormal.sample(&mut self.zero)
    }
}

/// Samples `η̂` with independent `N(0, 1/2)` real and imaginary parts on the half lattice.
pub fn sample_noise(spec: Arc<LatticeSpec>, seed: u64) -> NoiseRealization {
    let mut values = vec![Complex64::new(0.0, 0.0); spec.len()];
    ModeStreams::new(spec.clone(), seed).fill_complex(&mut values, |_| 1.0);
    NoiseRealization { spec, values }
}
