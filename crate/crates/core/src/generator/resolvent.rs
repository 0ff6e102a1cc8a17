//! Resolvent hierarchy `H_j`, truncated generator solves and the resolvent pairing.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock::{factorial, fock_inner, ChaosKernel, FockVector, Support};
use crate::generator::ops::{apply_aminus, apply_aplus, half_energy};
use crate::lattice::{Coupling, LatticeSpec};

/// Parameters of the resolvent solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventConfig {
    pub mu: f64,
    /// Relative residual target of the conjugate-gradient solves.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        ResolventConfig { mu: 1.0, tolerance: 1e-8, max_iterations: 500 }
    }
}

impl ResolventConfig {
    fn validate(&self, j: usize) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return domain("solver tolerance must be positive");
        }
        if !(self.mu >= 0.0) {
            return domain("mu must be nonnegative");
        }
        if j >= 3 && !(self.mu > 0.0) {
            return domain("H_j with j ≥ 3 needs mu > 0");
        }
        Ok(())
    }
}

/// Which source term drives the truncated generator equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceVariant {
    /// `𝔤₁ = (ν_eff/2)|k|²ψ̂(k)`, order 1.
    G1,
    /// `𝔫₀(ℓ,m) = λ_N·K_{ℓ,m}·𝟙_{ℓ+m=0}`, order 2, zero-sum.
    N0,
}

/// Source kernel of the truncated generator equation.
#[derive(Clone, Debug)]
pub struct SourceKernel {
    variant: SourceVariant,
    kernel: ChaosKernel,
}

impl SourceKernel {
    /// `𝔤₁` built from the Fourier coefficients `ψ̂` (indexed like the lattice modes).
    pub fn g1(spec: Arc<LatticeSpec>, coupling: &Coupling, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != spec.len() {
            return domain("psi must have one coefficient per lattice mode");
        }
        let half_nu = 0.5 * coupling.nu_eff;
        let sp = spec.clone();
        let kernel = ChaosKernel::from_fn(spec, 1, Support::General, |idx| half_nu * sp.norm2(idx[0]) * psi[idx[0]])?;
        Ok(SourceKernel { variant: SourceVariant::G1, kernel })
    }

    /// `𝔫₀` at the coupling's cutoff.
    pub fn n0(spec: Arc<LatticeSpec>, coupling: &Coupling) -> Result<Self> {
        let sp = spec.clone();
        let lam = coupling.lambda_n;
        let kernel = ChaosKernel::from_fn(spec, 2, Support::ZeroSum, |idx| {
            Complex64::new(lam * sp.kernel_idx(idx[0], idx[1]), 0.0)
        })?;
        Ok(SourceKernel { variant: SourceVariant::N0, kernel })
    }

    pub fn variant(&self) -> SourceVariant {
        self.variant
    }

    pub fn kernel(&self) -> &ChaosKernel {
        &self.kernel
    }

    /// Chaos order `a` of the source.
    pub fn order(&self) -> usize {
        self.kernel.order()
    }
}

/// Smooth real test function `ψ̂(k) = exp(−|k|²/(2w²))`, one value per lattice mode.
pub fn gaussian_test_function(spec: &LatticeSpec, width: f64) -> Vec<Complex64> {
    (0..spec.len())
        .map(|i| Complex64::new((-spec.norm2(i) / (2.0 * width * width)).exp(), 0.0))
        .collect()
}

/// `(μ − L₀)⁻¹ f`.
pub fn diagonal_resolvent(mu: f64, f: &ChaosKernel) -> ChaosKernel {
    let spec = f.spec().clone();
    let mut out = f.clone();
    out.multiply_by(|idx| 1.0 / (mu + half_energy(&spec, idx)));
    out
}

/// `H_j f` with `H_2 = 0` and `H_j = −A₋ (μ − L₀ + H_{j−1})⁻¹ A₊`.
pub fn apply_hj(j: usize, cfg: &ResolventConfig, coupling: &Coupling, f: &ChaosKernel) -> Result<ChaosKernel> {
    if j < 2 {
        return domain("H_j is defined for j ≥ 2");
    }
    cfg.validate(j)?;
    if j == 2 {
        let mut z = f.clone();
        z.scale(0.0);
        return Ok(z);
    }
    let up = apply_aplus(coupling, f)?;
    let inner = solve_resolvent(j - 1, cfg, coupling, &up)?;
    let mut out = apply_aminus(coupling, &inner)?;
    out.scale(-1.0);
    Ok(out)
}

/// `(μ − L₀ + H_j)⁻¹ b` by diagonally preconditioned conjugate gradients.
pub fn solve_resolvent(j: usize, cfg: &ResolventConfig, coupling: &Coupling, b: &ChaosKernel) -> Result<ChaosKernel> {
    cfg.validate(j)?;
    if j <= 2 {
        return Ok(diagonal_resolvent(cfg.mu, b));
    }
    let apply = |x: &ChaosKernel| -> Result<ChaosKernel> {
        let mut y = apply_hj(j, cfg, coupling, x)?;
        let spec = x.spec().clone();
        let mu = cfg.mu;
        let src = x;
        y.map_in_place(|idx, v| v + (mu + half_energy(&spec, idx)) * src.get(idx));
        Ok(y)
    };
    conjugate_gradient(apply, |r| diagonal_resolvent(cfg.mu, r), b, cfg)
}

fn re_dot(a: &ChaosKernel, b: &ChaosKernel) -> f64 {
    a.dot(b).expect("same shape").re
}

/// Preconditioned CG for a Hermitian positive definite operator on kernels of one order.
fn conjugate_gradient<A, P>(apply: A, precond: P, b: &ChaosKernel, cfg: &ResolventConfig) -> Result<ChaosKernel>
where
    A: Fn(&ChaosKernel) -> Result<ChaosKernel>,
    P: Fn(&ChaosKernel) -> ChaosKernel,
{
    let b_norm = b.norm_sqr().sqrt();
    let mut x = b.clone();
    x.scale(0.0);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let one = Complex64::new(1.0, 0.0);
    let mut r = b.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = re_dot(&r, &z);
    let mut residual = 1.0;
    for _ in 0..cfg.max_iterations {
        let ap = apply(&p)?;
        let alpha = rz / re_dot(&p, &ap);
        x.axpy(one * alpha, &p)?;
        r.axpy(-one * alpha, &ap)?;
        residual = r.norm_sqr().sqrt() / b_norm;
        if residual <= cfg.tolerance {
            return Ok(x);
        }
        z = precond(&r);
        let rz_new = re_dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        let mut next = z.clone();
        next.axpy(one * beta, &p)?;
        p = next;
    }
    Err(Error::Solver { iterations: cfg.max_iterations, residual, tolerance: cfg.tolerance })
}

/// Solution `h̃` of the generator equation truncated at chaos `n`.
///
/// `h̃_a = (μ−L₀+H_{n+2−a})⁻¹ source` and `h̃_j = (μ−L₀+H_{n+2−j})⁻¹ A₊ h̃_{j−1}` for `a < j ≤ n`.
/// For the `𝔫₀` source the order-1 component is stored as an exact zero.
pub fn solve_truncated_generator(
    n: usize,
    cfg: &ResolventConfig,
    coupling: &Coupling,
    source: &SourceKernel,
) -> Result<FockVector> {
    let a = source.order();
    if n < a {
        return domain(format!("truncation level n = {n} below the source order {a}"));
    }
    if !(cfg.mu > 0.0) {
        return domain("truncated generator solves need mu > 0");
    }
    let spec = source.kernel.spec().clone();
    let mut out = FockVector::new(spec.clone());
    if a == 2 {
        out.set(ChaosKernel::zeros(spec, 1, Support::General)?)?;
    }
    let mut h = solve_resolvent(n + 2 - a, cfg, coupling, &source.kernel)?;
    for j in a + 1..=n {
        let up = apply_aplus(coupling, &h)?;
        out.set(h)?;
        h = solve_resolvent(n + 2 - j, cfg, coupling, &up)?;
    }
    out.set(h)?;
    Ok(out)
}

/// `‖(μ − L₀)h̃ − A₊h̃ − A₋h̃ − source‖ / ‖source‖` on chaoses `≤ n` (Fock norms).
pub fn truncated_residual(
    n: usize,
    cfg: &ResolventConfig,
    coupling: &Coupling,
    source: &SourceKernel,
    h: &FockVector,
) -> Result<f64> {
    let spec = h.spec().clone();
    let mut r = FockVector::new(spec.clone());
    for k in h.iter() {
        let mut d = k.clone();
        let sp = spec.clone();
        d.multiply_by(|idx| cfg.mu + half_energy(&sp, idx));
        r.add(d)?;
        if k.order() >= 1 && k.order() < n {
            let mut up = apply_aplus(coupling, k)?;
            up.scale(-1.0);
            r.add(up)?;
        }
        if k.order() >= 1 {
            let mut down = apply_aminus(coupling, k)?;
            down.scale(-1.0);
            r.add(down)?;
        }
    }
    let mut s = source.kernel.clone();
    s.scale(-1.0);
    r.add(s)?;
    let src = FockVector::single(source.kernel.clone());
    Ok((fock_inner(&r, &r)? / fock_inner(&src, &src)?).sqrt())
}

/// `⟨𝔫₀, h̃^{N,n}⟩ = 2·⟨𝔫₀, (μ − L₀ + H_n)⁻¹ 𝔫₀⟩` for `n ≥ 2`.
pub fn resolvent_pairing(n: usize, cfg: &ResolventConfig, coupling: &Coupling) -> Result<f64> {
    if n < 2 {
        return domain("the resolvent pairing needs n ≥ 2");
    }
    if !(cfg.mu > 0.0) {
        return domain("the resolvent pairing needs mu > 0");
    }
    let spec = Arc::new(LatticeSpec::new(coupling.cutoff)?);
    let n0 = SourceKernel::n0(spec, coupling)?;
    let h2 = solve_resolvent(n, cfg, coupling, n0.kernel())?;
    Ok(factorial(2) * n0.kernel().dot(&h2)?.re)
}
