//! The diagonal operator `𝒮` and the diagonal/off-diagonal split of `⟨𝒮A₊φ₁, A₊φ₂⟩`.

use num_complex::Complex64;

use crate::error::{config, Result};
use crate::fock::{factorial, ChaosKernel, FockVector};
use crate::lattice::{Coupling, LatticeSpec, Momentum};

/// `σ_n(k) = Σ_{π∈S_n} |k_{π(1)}|²/|k_{π(2)}| = (n−2)!·Σ_{a≠b} |k_a|²/|k_b|`, zero for `n ≤ 1`.
pub fn sigma(spec: &LatticeSpec, idx: &[usize]) -> f64 {
    let n = idx.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                acc += spec.norm2(idx[a]) / spec.norm(idx[b]);
            }
        }
    }
    factorial(n - 2) * acc
}

/// `σ_n` on momenta.
pub fn sigma_momenta(ks: &[Momentum]) -> f64 {
    let n = ks.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                acc += ks[a].norm2() as f64 / ks[b].norm();
            }
        }
    }
    factorial(n - 2) * acc
}

/// `𝒮f`: order `n ≥ 2` multiplied by `σ_n`, orders `≤ 1` set to zero.
pub fn apply_s(f: &FockVector) -> FockVector {
    let mut out = f.clone();
    for k in out.iter_mut() {
        let spec = k.spec().clone();
        k.multiply_by(|idx| sigma(&spec, idx));
    }
    out
}

/// `√⟨𝒮f, f⟩`.
pub fn s_half_norm(f: &FockVector) -> f64 {
    f.iter()
        .filter(|k| k.order() >= 2)
        .map(|k| {
            let spec = k.spec().clone();
            factorial(k.order()) * k.par_sum(|idx, v| (sigma(&spec, idx) * v.norm_sqr()).into()).re
        })
        .sum::<f64>()
        .sqrt()
}

/// Parts of `⟨𝒮A₊φ₁, A₊φ₂⟩` with the off-diagonal combinatorial constants factored out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingParts {
    pub diag: f64,
    pub off1: f64,
    pub off2: f64,
}

impl PairingParts {
    /// `diag + c₁·off1 + c₂·off2` for given constants.
    pub fn reconstruct(&self, c1: f64, c2: f64) -> f64 {
        self.diag + c1 * self.off1 + c2 * self.off2
    }
}

/// Constants `(c₁, c₂) = (4n(n−1), n(n−1)(n−2))` that make
/// [`PairingParts::reconstruct`] equal `⟨𝒮A₊φ₁, A₊φ₂⟩` for symmetric `φ` of order `n`.
pub fn off_diagonal_constants(n: usize) -> (f64, f64) {
    let n = n as f64;
    (4.0 * n * (n - 1.0), n * (n - 1.0) * (n - 2.0))
}

/// Diagonal part and the two off-diagonal sums of `⟨𝒮A₊φ₁, A₊φ₂⟩`.
///
/// * `diag = n!·n·2λ_N²·Σ_k |k₁|²φ₁(k)conj φ₂(k)·Σ_{ℓ+m=k₁} σ(ℓ,m,k_{2:n})·K²_{ℓ,m}`
/// * `off1 = n!·λ_N²·Σ σ(k)·|k₁+k₂|K_{k₁,k₂}·|k₁+k₃|K_{k₁,k₃}·φ₁(k₁+k₂,k₃,k_{4:})·conj φ₂(k₁+k₃,k₂,k_{4:})`
/// * `off2 = n!·λ_N²·Σ σ(k)·|k₁+k₂|K_{k₁,k₂}·|k₃+k₄|K_{k₃,k₄}·φ₁(k₁+k₂,k₃,k₄,k_{5:})·conj φ₂(k₃+k₄,k₁,k₂,k_{5:})`
///
/// with `k = k_{1:n+1}` in the off-diagonal sums. `s_mult` is the multiplier of `𝒮` on order `n+1`.
pub fn decompose_pairing<S>(s_mult: S, phi1: &ChaosKernel, phi2: &ChaosKernel, coupling: &Coupling) -> Result<PairingParts>
where
    S: Fn(&[Momentum]) -> f64 + Sync,
{
    let n = phi1.order();
    if phi2.order() != n || **phi1.spec() != **phi2.spec() {
        return config("decompose_pairing needs kernels of equal order on one lattice");
    }
    if n == 0 {
        return config("decompose_pairing needs order ≥ 1");
    }
    let spec = phi1.spec().clone();
    let lam2 = coupling.lambda_n * coupling.lambda_n;
    let m_len = spec.len();

    let diag = phi1
        .par_sum(|idx, v| {
            let w = phi2.get(idx);
            if v == Complex64::new(0.0, 0.0) || w == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let k1 = spec.mode(idx[0]);
            let mut ks: Vec<Momentum> = Vec::with_capacity(n + 1);
            let mut inner = 0.0;
            for l in 0..m_len {
                let Some(mi) = spec.index_of(k1 - spec.mode(l)) else { continue };
                let k = spec.kernel_idx(l, mi);
                if k == 0.0 {
                    continue;
                }
                ks.clear();
                ks.push(spec.mode(l));
                ks.push(spec.mode(mi));
                ks.extend(idx[1..].iter().map(|&i| spec.mode(i)));
                inner += s_mult(&ks) * k * k;
            }
            spec.norm2(idx[0]) * inner * v * w.conj()
        })
        .re
        * factorial(n)
        * n as f64
        * 2.0
        * lam2;

    let full = ChaosKernel::zeros(spec.clone(), n + 1, crate::fock::Support::General)?;
    let pref = factorial(n) * lam2;
    let off1 = if n + 1 >= 3 {
        full.par_sum(|idx, _| {
            let (Some(s12), Some(s13)) = (spec.sum_index(idx[0], idx[1]), spec.sum_index(idx[0], idx[2])) else {
                return Complex64::new(0.0, 0.0);
            };
            let w = spec.norm(s12) * spec.kernel_idx(idx[0], idx[1]) * spec.norm(s13) * spec.kernel_idx(idx[0], idx[2]);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut a = vec![s12, idx[2]];
            a.extend_from_slice(&idx[3..]);
            let mut b = vec![s13, idx[1]];
            b.extend_from_slice(&idx[3..]);
            let ks: Vec<Momentum> = idx.iter().map(|&i| spec.mode(i)).collect();
            s_mult(&ks) * w * phi1.get(&a) * phi2.get(&b).conj()
        })
        .re
            * pref
    } else {
        0.0
    };
    let off2 = if n + 1 >= 4 {
        full.par_sum(|idx, _| {
            let (Some(s12), Some(s34)) = (spec.sum_index(idx[0], idx[1]), spec.sum_index(idx[2], idx[3])) else {
                return Complex64::new(0.0, 0.0);
            };
            let w = spec.norm(s12) * spec.kernel_idx(idx[0], idx[1]) * spec.norm(s34) * spec.kernel_idx(idx[2], idx[3]);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut a = vec![s12, idx[2], idx[3]];
            a.extend_from_slice(&idx[4..]);
            let mut b = vec![s34, idx[0], idx[1]];
            b.extend_from_slice(&idx[4..]);
            let ks: Vec<Momentum> = idx.iter().map(|&i| spec.mode(i)).collect();
            s_mult(&ks) * w * phi1.get(&a) * phi2.get(&b).conj()
        })
        .re
            * pref
    } else {
        0.0
    };
    Ok(PairingParts { diag, off1, off2 })
}
