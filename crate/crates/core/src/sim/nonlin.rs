//! The quadratic nonlinearity `M_k` and the zero-mode drift `N₀`, by direct
//! convolution and by a zero-padded FFT transform.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{config, Result};
use crate::lattice::{Coupling, LatticeSpec};
use crate::sim::state::SpectralState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `M_k = |k|·Σ_{ℓ+m=k} K_{ℓ,m} û(ℓ)û(m)` per mode and `N₀ = Σ_{ℓ+m=0} K_{ℓ,m} û(ℓ)û(m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonlinearity {
    pub modes: Vec<Complex64>,
    pub zero_mode: f64,
}

/// Direct `O(M²)` convolution. Computed on the half lattice and mirrored by conjugation.
pub fn nonlinearity_direct(state: &SpectralState, _coupling: &Coupling) -> Nonlinearity {
    let spec = &state.spec;
    let u = &state.u_hat;
    let mut modes = vec![ZERO; spec.len()];
    for &k in spec.half_lattice() {
        let kk = spec.mode(k);
        let mut acc = ZERO;
        for l in 0..spec.len() {
            let Some(m) = spec.index_of(kk - spec.mode(l)) else { continue };
            let c = spec.kernel_idx(l, m);
            if c != 0.0 {
                acc += c * u[l] * u[m];
            }
        }
        modes[k] = spec.norm(k) * acc;
        modes[spec.neg(k)] = modes[k].conj();
    }
    let zero_mode = (0..spec.len()).map(|l| spec.kernel_idx(l, spec.neg(l)) * u[l].norm_sqr()).sum();
    Nonlinearity { modes, zero_mode }
}

/// Smallest alias-free grid side for cutoff `N`.
pub fn min_grid_side(cutoff: u32) -> usize {
    3 * cutoff as usize + 1
}

/// Grid side of the form `2^a·3^b·5^c` at least `3N + 1`.
pub fn default_grid_side(cutoff: u32) -> usize {
    let mut l = min_grid_side(cutoff);
    loop {
        let mut r = l;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return l;
        }
        l += 1;
    }
}

/// Reusable workspace for the transform method.
///
/// With `B_i(ℓ) = i·(ℓ_i/|ℓ|)·û(ℓ)` the product `B₁B₁ − B₂B₂` in physical space is the
/// convolution of `c(ℓ,m)/(|ℓ||m|)·û(ℓ)û(m)`. Packing `z = b₁ + i·b₂` gives it as `Re(z²)`.
#[derive(Clone)]
pub struct TransformWorkspace {
    spec: Arc<LatticeSpec>,
    side: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    grid: Vec<Complex64>,
    scratch: Vec<Complex64>,
    slots: Vec<usize>,
    unit: Vec<[f64; 2]>,
    rows: Vec<usize>,
}

impl TransformWorkspace {
    /// Workspace on an `L×L` grid; `L` must be at least `3N + 1`.
    pub fn new(spec: Arc<LatticeSpec>, side: usize) -> Result<Self> {
        let need = min_grid_side(spec.cutoff());
        if side < need {
            return config(format!("transform grid {side} too small for dealiasing, need at least {need}"));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(side);
        let inverse = planner.plan_fft_inverse(side);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        let wrap = |k: i32| k.rem_euclid(side as i32) as usize;
        let slots = spec.modes().iter().map(|k| wrap(k.k1) * side + wrap(k.k2)).collect();
        let unit = spec
            .modes()
            .iter()
            .map(|k| [k.k1 as f64 / k.norm(), k.k2 as f64 / k.norm()])
            .collect();
        let n = spec.cutoff() as i32;
        let rows = (-n..=n).map(wrap).collect();
        Ok(TransformWorkspace {
            spec,
            side,
            forward,
            inverse,
            grid: vec![ZERO; side * side],
            scratch: vec![ZERO; scratch_len],
            slots,
            unit,
            rows,
        })
    }

    /// Workspace with [`default_grid_side`].
    pub fn with_default_grid(spec: Arc<LatticeSpec>) -> Result<Self> {
        let side = default_grid_side(spec.cutoff());
        Self::new(spec, side)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    fn transpose(&mut self) {
        let l = self.side;
        for i in 0..l {
            for j in i + 1..l {
                self.grid.swap(i * l + j, j * l + i);
            }
        }
    }

    fn rows_fft(&mut self, forward: bool, only_rows: bool) {
        let l = self.side;
        let plan = if forward { &self.forward } else { &self.inverse };
        if only_rows {
            for &r in &self.rows {
                plan.process_with_scratch(&mut self.grid[r * l..(r + 1) * l], &mut self.scratch);
            }
        } else {
            plan.process_with_scratch(&mut self.grid, &mut self.scratch);
        }
    }

    /// Transform evaluation of [`nonlinearity_direct`].
    pub fn evaluate(&mut self, state: &SpectralState) -> Nonlinearity {
        let spec = self.spec.clone();
        let u = &state.u_hat;
        self.grid.iter_mut().for_each(|z| *z = ZERO);
        let i = Complex64::new(0.0, 1.0);
        for (p, &slot) in self.slots.iter().enumerate() {
            let [e1, e2] = self.unit[p];
            let b1 = i * e1 * u[p];
            let b2 = i * e2 * u[p];
            self.grid[slot] = b1 + i * b2;
        }
        // Inverse transform: along k2 on the occupied rows, then along k1.
        self.rows_fft(false, true);
        self.transpose();
        self.rows_fft(false, false);
        for z in self.grid.iter_mut() {
            *z = Complex64::new(z.re * z.re - z.im * z.im, 0.0);
        }
        // Forward transform back to [k1][k2] layout.
        self.rows_fft(true, false);
        self.transpose();
        self.rows_fft(true, true);
        let norm = 1.0 / ((self.side * self.side) as f64 * 2.0 * PI);
        let mut modes = vec![ZERO; spec.len()];
        for &k in spec.half_lattice() {
            modes[k] = spec.norm(k) * norm * self.grid[self.slots[k]];
            modes[spec.neg(k)] = modes[k].conj();
        }
        let zero_mode = self.grid[0].re * norm;
        Nonlinearity { modes, zero_mode }
    }
}

/// Transform evaluation with a freshly planned workspace on the default grid.
pub fn nonlinearity_transform(state: &SpectralState, _coupling: &Coupling) -> Result<Nonlinearity> {
    Ok(TransformWorkspace::with_default_grid(state.spec.clone())?.evaluate(state))
}
