//! The generator pieces `L₀`, `A₊` and `A₋` acting on chaos kernels.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::fock::{ChaosKernel, FockVector, Support};
use crate::lattice::{Coupling, LatticeSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `½ Σᵢ |kᵢ|²`, the multiplier of `−L₀`.
pub fn half_energy(spec: &LatticeSpec, idx: &[usize]) -> f64 {
    0.5 * idx.iter().map(|&i| spec.norm2(i)).sum::<f64>()
}

/// Componentwise multiplication by `−½ Σ|kᵢ|²`.
pub fn apply_l0(f: &FockVector) -> FockVector {
    let mut out = f.clone();
    for k in out.iter_mut() {
        let spec = k.spec().clone();
        k.multiply_by(|idx| -half_energy(&spec, idx));
    }
    out
}

/// `A₊`: order `n` to `n+1`, the symmetrization of `n·λ_N·|k₁+k₂|·K_{k₁,k₂}·f(k₁+k₂, k₃, …)`.
///
/// For symmetric `f` the symmetrization reduces to an average over the merged pair.
pub fn apply_aplus(coupling: &Coupling, f: &ChaosKernel) -> Result<ChaosKernel> {
    let n = f.order();
    if n == 0 {
        return domain("A₊ needs order ≥ 1");
    }
    let spec = f.spec().clone();
    let pairs = ((n + 1) * n / 2) as f64;
    let pref = n as f64 * coupling.lambda_n / pairs;
    ChaosKernel::from_fn(spec.clone(), n + 1, f.support(), |idx| {
        let mut arg = [0usize; 16];
        let mut acc = ZERO;
        for a in 0..=n {
            for b in a + 1..=n {
                let Some(s) = spec.sum_index(idx[a], idx[b]) else { continue };
                let k = spec.kernel_idx(idx[a], idx[b]);
                if k == 0.0 {
                    continue;
                }
                arg[0] = s;
                let mut p = 1;
                for (c, &i) in idx.iter().enumerate() {
                    if c != a && c != b {
                        arg[p] = i;
                        p += 1;
                    }
                }
                acc += spec.norm(s) * k * f.get(&arg[..n]);
            }
        }
        pref * acc
    })
}

/// `A₋`: order `n` to `n−1`,
/// `2n·λ_N·Σ_j Σ_{ℓ+m=k_j} |m|·K_{k_j,−ℓ}·f(ℓ, m, k_{−j})`.
///
/// Zero-sum input maps to zero-sum output; at order 1 the result is a zero kernel.
pub fn apply_aminus(coupling: &Coupling, f: &ChaosKernel) -> Result<ChaosKernel> {
    let n = f.order();
    if n == 0 {
        return domain("A₋ needs order ≥ 1");
    }
    let spec = f.spec().clone();
    if n == 1 {
        return Ok(ChaosKernel::scalar(spec, ZERO));
    }
    if f.support() == Support::ZeroSum && n == 2 {
        return ChaosKernel::zeros(spec, 1, Support::General);
    }
    let pref = 2.0 * n as f64 * coupling.lambda_n;
    let m_len = spec.len();
    ChaosKernel::from_fn(spec.clone(), n - 1, f.support(), |idx| {
        let mut arg = [0usize; 16];
        let mut acc = ZERO;
        for j in 0..n - 1 {
            let kj = spec.mode(idx[j]);
            let mut p = 2;
            for (c, &i) in idx.iter().enumerate() {
                if c != j {
                    arg[p] = i;
                    p += 1;
                }
            }
            for l in 0..m_len {
                let Some(mi) = spec.index_of(kj - spec.mode(l)) else { continue };
                let k = spec.kernel_idx(idx[j], spec.neg(l));
                if k == 0.0 {
                    continue;
                }
                arg[0] = l;
                arg[1] = mi;
                acc += spec.norm(mi) * k * f.get(&arg[..n]);
            }
        }
        pref * acc
    })
}
