//! Fourier state of the Burgers field and its stationary initialization.

use std::sync::Arc;

use num_complex::Complex64;

use crate::fock::sample_noise;
use crate::lattice::LatticeSpec;

/// Modes `û(k)` on the cutoff lattice plus the height zero mode `ĥ(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    pub spec: Arc<LatticeSpec>,
    pub u_hat: Vec<Complex64>,
    pub h_zero: f64,
    pub time: f64,
}

impl SpectralState {
    /// State with all modes zero.
    pub fn zeros(spec: Arc<LatticeSpec>) -> Self {
        let u_hat = vec![Complex64::new(0.0, 0.0); spec.len()];
        SpectralState { spec, u_hat, h_zero: 0.0, time: 0.0 }
    }

    /// Largest violation of `û(−k) = conj û(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.spec.len())
            .map(|i| (self.u_hat[self.spec.neg(i)] - self.u_hat[i].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Draws `û` from the invariant white-noise law; `ĥ(0) = 0`, `t = 0`.
pub fn init_stationary(spec: Arc<LatticeSpec>, seed: u64) -> SpectralState {
    let noise = sample_noise(spec.clone(), seed);
    SpectralState { spec, u_hat: noise.values, h_zero: 0.0, time: 0.0 }
}
