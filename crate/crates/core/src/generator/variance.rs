//! Chaos-2 variance kernels of the quadratic variation for the diagonal observables.

use num_complex::Complex64;

use crate::error::Result;
use crate::generator::observables::check_table;
use crate::lattice::{kernel_raw, Coupling, Momentum};
use crate::recursions::GTable;

/// `h(ℓ) = 𝔥₂(ℓ,−ℓ) = λ_N·K_{ℓ,−ℓ} / (|ℓ|²·(1 + G_n(L^N(|ℓ|²))))`.
fn h2(coupling: &Coupling, g: &GTable, n: usize, l: Momentum) -> f64 {
    let r2 = l.norm2() as f64;
    let x = coupling.profile_unchecked(r2);
    coupling.lambda_n * kernel_raw(coupling.cutoff, l, -l) / (r2 * (1.0 + g.g(n, x).expect("range checked")))
}

fn for_each_mode(cutoff: u32, mut f: impl FnMut(Momentum)) {
    let n = cutoff as i32;
    for a in -n..=n {
        for b in -n..=n {
            let k = Momentum::new(a, b);
            let r2 = k.norm2();
            if r2 >= 1 && r2 <= (n as i64) * (n as i64) {
                f(k);
            }
        }
    }
}

/// `‖(−L₀)^{−1/2}𝔉_{2,2;2,2}‖² = 32·Σ_p |p|²·h(p)⁴`.
///
/// `𝔉_{2,2;2,2} = Σ_k |k|²(D_k𝔥₂·D_{−k}𝔥₂ − E[…])` has the order-2 kernel `F(p,−p) = 4|p|²h(p)²`.
pub fn variance_kernel_f22(coupling: &Coupling, g: &GTable, n: usize) -> Result<f64> {
    check_table(g, coupling, n)?;
    let mut acc = 0.0;
    for_each_mode(coupling.cutoff, |p| {
        let h = h2(coupling, g, n, p);
        acc += p.norm2() as f64 * h.powi(4);
    });
    Ok(32.0 * acc)
}

/// `‖(−L₀)^{−1/2}𝔉_{2,2;1,1}‖² = 8·Σ_p |p|²·h(p)²·|𝔟₁(p)|²`,
/// with `𝔟₁(p) = ν_eff ψ̂(p) / (1 + G_{n+1}(L^N(|p|²/2)))`.
///
/// `𝔉_{2,2;1,1} = Σ_k |k|² D_k𝔥₂·D_{−k}𝔟₁` has the order-1 kernel `2|p|²h(p)𝔟₁(p)`.
pub fn variance_kernel_f2211<P>(coupling: &Coupling, g: &GTable, n: usize, psi: P) -> Result<f64>
where
    P: Fn(Momentum) -> Complex64,
{
    check_table(g, coupling, n + 1)?;
    let mut acc = 0.0;
    for_each_mode(coupling.cutoff, |p| {
        let h = h2(coupling, g, n, p);
        let r2 = p.norm2() as f64;
        let x = coupling.profile_unchecked(0.5 * r2);
        let b = coupling.nu_eff * psi(p) / (1.0 + g.g(n + 1, x).expect("range checked"));
        acc += r2 * h * h * b.norm_sqr();
    });
    Ok(8.0 * acc)
}
