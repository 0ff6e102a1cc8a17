//! Wick monomials, chaos evaluation, Malliavin derivatives and the number operator.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{config, domain, Error, Result};
use crate::fock::kernel::{ChaosKernel, FockVector, Support};
use crate::fock::noise::NoiseRealization;
use crate::lattice::{LatticeSpec, Momentum};

/// Largest chaos order accepted by [`evaluate_chaos`].
pub const MAX_EVAL_ORDER: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `:η̂(p₁)…η̂(p_n):` by removing contractions with the last factor recursively.
///
/// `:X·η̂(p): = :X:·η̂(p) − Σ_{q ∈ X} 𝟙_{q = −p} :X∖q:`.
pub fn wick_monomial(spec: &LatticeSpec, eta: &[Complex64], idx: &[usize]) -> Complex64 {
    let n = idx.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (head, last) = (&idx[..n - 1], idx[n - 1]);
    let mut acc = wick_monomial(spec, eta, head) * eta[last];
    let partner = spec.neg(last);
    let mut rest = [0usize; 16];
    for (i, &q) in head.iter().enumerate() {
        if q == partner {
            rest[..i].copy_from_slice(&head[..i]);
            rest[i..n - 2].copy_from_slice(&head[i + 1..]);
            acc -= wick_monomial(spec, eta, &rest[..n - 2]);
        }
    }
    acc
}

/// `I_n(f) = Σ f(p)·:η̂(p₁)…η̂(p_n):` for one symmetric kernel.
pub fn evaluate_kernel(f: &ChaosKernel, eta: &[Complex64]) -> Complex64 {
    let spec = f.spec();
    match f.support() {
        Support::General => eval_dense(f.data(), f.order(), spec, eta),
        Support::ZeroSum => f.par_sum(|idx, v| v * wick_monomial(spec, eta, idx)),
    }
}

/// Dense evaluation through the kernel-level form of the same recursion:
/// `I_n(f) = I_{n−1}(Σ_p f(·,p) η̂(p)) − (n−1)·I_{n−2}(Σ_s f(·,s,−s))`, valid for symmetric `f`.
fn eval_dense(data: &[Complex64], n: usize, spec: &LatticeSpec, eta: &[Complex64]) -> Complex64 {
    let m = spec.len();
    match n {
        0 => data[0],
        1 => data.iter().zip(eta).map(|(a, b)| a * b).sum(),
        _ => {
            let contracted: Vec<Complex64> = data
                .par_chunks(m)
                .map(|row| row.iter().zip(eta).map(|(a, b)| a * b).sum())
                .collect();
            let traced: Vec<Complex64> = data
                .par_chunks(m * m)
                .map(|block| (0..m).map(|s| block[s * m + spec.neg(s)]).sum())
                .collect();
            eval_dense(&contracted, n - 1, spec, eta) - (n - 1) as f64 * eval_dense(&traced, n - 2, spec, eta)
        }
    }
}

/// Real-valued chaos variable `Σ_n I_n(f_n)(η)` for orders up to [`MAX_EVAL_ORDER`].
pub fn evaluate_chaos(f: &FockVector, eta: &NoiseRealization) -> Result<f64> {
    if *f.spec().as_ref() != *eta.spec.as_ref() {
        return config("noise and kernels live on different lattices");
    }
    if let Some(n) = f.max_order() {
        if n > MAX_EVAL_ORDER {
            return Err(Error::Unsupported(format!(
                "evaluation at chaos order {n} exceeds the cap {MAX_EVAL_ORDER}"
            )));
        }
    }
    Ok(f.iter().map(|k| evaluate_kernel(k, &eta.values)).sum::<Complex64>().re)
}

/// `(D_k f)(p_{1:n−1}) = n·f(p_{1:n−1}, k)`, returned in general storage.
pub fn malliavin_derivative(f: &ChaosKernel, k: Momentum) -> Result<ChaosKernel> {
    let n = f.order();
    if n == 0 {
        return domain("the Malliavin derivative lowers the order; order 0 has none");
    }
    let spec = f.spec().clone();
    let Some(ki) = spec.index_of(k) else {
        return ChaosKernel::zeros(spec, n - 1, Support::General);
    };
    ChaosKernel::from_fn(spec, n - 1, Support::General, |idx| {
        let mut full = [0usize; 16];
        full[..n - 1].copy_from_slice(idx);
        full[n - 1] = ki;
        n as f64 * f.get(&full[..n])
    })
}

/// Multiplies each component by its order.
pub fn apply_number_operator(f: &FockVector) -> FockVector {
    let mut out = f.clone();
    for k in out.iter_mut() {
        let n = k.order() as f64;
        k.scale(n);
    }
    out
}

/// `Σ_k |k|²·|D_k F(η)|²` for a sum `F` of symmetric kernels, by streaming over stored entries.
///
/// Each stored tuple `t` contributes `n·f(t)·:η̂(t_{1:n−1}):` to `D_{t_n}F`.
pub fn energy_density(f: &FockVector, eta: &[Complex64]) -> f64 {
    let spec = f.spec();
    let mut grad = vec![ZERO; spec.len()];
    malliavin_gradient(f, eta, &mut grad);
    grad.iter().enumerate().map(|(i, d)| spec.norm2(i) * d.norm_sqr()).sum()
}

/// Fills `grad[k] = D_k F(η)` for every mode.
pub fn malliavin_gradient(f: &FockVector, eta: &[Complex64], grad: &mut [Complex64]) {
    grad.iter_mut().for_each(|g| *g = ZERO);
    let spec = f.spec();
    for k in f.iter() {
        let n = k.order();
        if n == 0 {
            continue;
        }
        let w = n as f64;
        k.for_each(|idx, v| {
            if v != ZERO {
                grad[idx[n - 1]] += w * v * wick_monomial(spec, eta, &idx[..n - 1]);
            }
        });
    }
}
