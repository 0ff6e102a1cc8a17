//! Diagonal observables `𝔣^{N,n}_a` and the `H¹`-type norm.

use crate::error::{config, domain, Result};
use crate::fock::{factorial, ChaosKernel, FockVector};
use crate::generator::ops::{apply_aplus, half_energy};
use crate::generator::resolvent::SourceKernel;
use crate::lattice::Coupling;
use crate::recursions::GTable;

/// Checks that `g` covers `G_{j}` for `j ≤ j_need` on `[0, L^N(1/2)]`.
pub(crate) fn check_table(g: &GTable, coupling: &Coupling, j_need: usize) -> Result<()> {
    if g.j_max() < j_need {
        return config(format!("G table stops at index {}, need {j_need}", g.j_max()));
    }
    let top = coupling.profile(0.5)?;
    if g.grid().x_max() < top {
        return config(format!("G table range {} below L^N(1/2) = {top}", g.grid().x_max()));
    }
    Ok(())
}

/// Multiplier `s·(1 + G_m(L^N(s)))` with `s = ½Σ|kᵢ|²`.
fn dressed_multiplier(g: &GTable, coupling: &Coupling, m: usize, s: f64) -> f64 {
    let x = coupling.profile_unchecked(s);
    s * (1.0 + g.g(m, x).expect("range checked"))
}

/// Components `𝔣_{a,j}` for `a ≤ j ≤ min(n, j_stop)`.
///
/// `𝔣_{a,a} = (−L₀[1 + G_{n+2−a}(L^N(−L₀))])⁻¹ 𝔤_a` and
/// `𝔣_{a,j} = (−L₀[1 + G_{n+2−j}(L^N(−L₀))])⁻¹ A₊ 𝔣_{a,j−1}`.
pub fn observables_f_upto(
    n: usize,
    j_stop: usize,
    coupling: &Coupling,
    g: &GTable,
    source: &SourceKernel,
) -> Result<FockVector> {
    let a = source.order();
    if n < a {
        return domain(format!("n = {n} below the source order {a}"));
    }
    check_table(g, coupling, n + 2 - a)?;
    let spec = source.kernel().spec().clone();
    let mut out = FockVector::new(spec.clone());
    let mut cur: ChaosKernel = source.kernel().clone();
    for j in a..=n.min(j_stop) {
        if j > a {
            cur = apply_aplus(coupling, &cur)?;
        }
        let m = n + 2 - j;
        let sp = spec.clone();
        cur.multiply_by(|idx| 1.0 / dressed_multiplier(g, coupling, m, half_energy(&sp, idx)));
        out.set(cur.clone())?;
    }
    Ok(out)
}

/// All components `𝔣^{N,n}_{a,j}`, `a ≤ j ≤ n`; `a` is the order of the source.
pub fn observables_f(a: usize, n: usize, coupling: &Coupling, g: &GTable, source: &SourceKernel) -> Result<FockVector> {
    if a != source.order() {
        return domain(format!("source has order {}, expected {a}", source.order()));
    }
    observables_f_upto(n, n, coupling, g, source)
}

/// `‖(−L₀)^{1/2} f‖ = √(Σ_n n!·Σ ½|k|²·|f_n|²)`.
pub fn h1_norm(f: &FockVector) -> f64 {
    f.iter()
        .map(|k| {
            let spec = k.spec().clone();
            factorial(k.order()) * k.par_sum(|idx, v| (half_energy(&spec, idx) * v.norm_sqr()).into()).re
        })
        .sum::<f64>()
        .sqrt()
}

/// `‖(−L₀)^{−1/2} f‖`, skipping order 0.
pub fn hminus1_norm(f: &FockVector) -> f64 {
    f.iter()
        .filter(|k| k.order() > 0)
        .map(|k| {
            let spec = k.spec().clone();
            factorial(k.order()) * k.par_sum(|idx, v| (v.norm_sqr() / half_energy(&spec, idx)).into()).re
        })
        .sum::<f64>()
        .sqrt()
}
