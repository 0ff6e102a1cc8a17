//! Lattice sum `P^N` with handles `H`, `H⁺` and its integral approximation.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::lattice::{kernel_raw, Coupling, Momentum};

/// `P^N(μ, k_{1:n}) = 4λ_N²·Σ_{ℓ+m=k₁} K²_{ℓ,m}·[μ + Γ·H⁺(L^N(μ+Γ))] / [μ + Γ·H(L^N(μ+Γ))]²`
/// with `Γ = ½(|ℓ|² + |m|² + |k_{2:n}|²)`.
pub fn replacement_sum<H, Hp>(n: usize, coupling: &Coupling, mu: f64, ks: &[Momentum], h: H, hplus: Hp) -> Result<f64>
where
    H: Fn(f64) -> f64 + Sync,
    Hp: Fn(f64) -> f64 + Sync,
{
    if ks.len() != n || n == 0 {
        return domain(format!("expected {n} momenta, got {}", ks.len()));
    }
    if ks.iter().any(|k| k.is_zero()) {
        return domain("momenta must be nonzero");
    }
    if !(mu >= 0.0) {
        return domain("mu must be nonnegative");
    }
    let cutoff = coupling.cutoff;
    let nn = cutoff as i32;
    let k1 = ks[0];
    let tail: f64 = ks[1..].iter().map(|k| k.norm2() as f64).sum();
    let sum: f64 = (-nn..=nn)
        .into_par_iter()
        .map(|l1| {
            let mut acc = 0.0;
            for l2 in -nn..=nn {
                let l = Momentum::new(l1, l2);
                let m = k1 - l;
                if l.is_zero() || m.is_zero() {
                    continue;
                }
                let k = kernel_raw(cutoff, l, m);
                if k == 0.0 {
                    continue;
                }
                let gamma = 0.5 * (l.norm2() as f64 + m.norm2() as f64 + tail);
                let x = coupling.profile_unchecked(mu + gamma);
                let den = mu + gamma * h(x);
                acc += k * k * (mu + gamma * hplus(x)) / (den * den);
            }
            acc
        })
        .sum();
    Ok(4.0 * coupling.lambda_n * coupling.lambda_n * sum)
}

/// `∫₀^{L^N(μ + ½|k_{1:n}|²)} H⁺(y)/H(y)² dy` by composite Simpson quadrature.
pub fn replacement_integral<H, Hp>(coupling: &Coupling, mu: f64, ks: &[Momentum], h: H, hplus: Hp) -> Result<f64>
where
    H: Fn(f64) -> f64,
    Hp: Fn(f64) -> f64,
{
    let e: f64 = 0.5 * ks.iter().map(|k| k.norm2() as f64).sum::<f64>();
    let top = coupling.profile(mu + e)?;
    let steps = 4000;
    let dx = top / steps as f64;
    let f = |y: f64| hplus(y) / (h(y) * h(y));
    let mut acc = f(0.0) + f(top);
    for i in 1..steps {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * dx);
    }
    Ok(acc * dx / 3.0)
}
