//! Momentum lattice, interaction kernel, coupling constants and the logarithmic profile.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{domain, Result};

/// Integer Fourier wavenumber on the 2π-torus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Momentum {
    pub k1: i32,
    pub k2: i32,
}

impl Momentum {
    pub const ZERO: Momentum = Momentum { k1: 0, k2: 0 };

    pub const fn new(k1: i32, k2: i32) -> Self {
        Momentum { k1, k2 }
    }

    /// Squared Euclidean norm, exact.
    pub fn norm2(self) -> i64 {
        let (a, b) = (self.k1 as i64, self.k2 as i64);
        a * a + b * b
    }

    /// Euclidean norm.
    pub fn norm(self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }
}

impl Add for Momentum {
    type Output = Momentum;
    fn add(self, o: Momentum) -> Momentum {
        Momentum::new(self.k1 + o.k1, self.k2 + o.k2)
    }
}

impl Sub for Momentum {
    type Output = Momentum;
    fn sub(self, o: Momentum) -> Momentum {
        Momentum::new(self.k1 - o.k1, self.k2 - o.k2)
    }
}

impl Neg for Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        Momentum::new(-self.k1, -self.k2)
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

/// The cutoff lattice `{k ∈ Z² : 1 ≤ |k| ≤ N}` with deterministic indexing.
///
/// Modes are ordered lexicographically on `(k1, k2)`. The half lattice holds
/// the modes with `k1 > 0`, or `k1 = 0` and `k2 > 0`.
#[derive(Clone, Debug)]
pub struct LatticeSpec {
    cutoff: u32,
    modes: Vec<Momentum>,
    half: Vec<usize>,
    neg: Vec<usize>,
    norm: Vec<f64>,
    norm2: Vec<f64>,
    grid: Vec<i32>,
}

impl PartialEq for LatticeSpec {
    fn eq(&self, other: &Self) -> bool {
        self.cutoff == other.cutoff
    }
}

impl LatticeSpec {
    /// Builds the lattice of all modes with `1 ≤ |k| ≤ cutoff`.
    pub fn new(cutoff: u32) -> Result<Self> {
        if cutoff == 0 {
            return domain("lattice cutoff must be positive");
        }
        let n = cutoff as i32;
        let side = (2 * n + 1) as usize;
        let mut grid = vec![-1i32; side * side];
        let mut modes = Vec::new();
        for k1 in -n..=n {
            for k2 in -n..=n {
                let k = Momentum::new(k1, k2);
                let r2 = k.norm2();
                if r2 >= 1 && r2 <= (n as i64) * (n as i64) {
                    grid[((k1 + n) as usize) * side + (k2 + n) as usize] = modes.len() as i32;
                    modes.push(k);
                }
            }
        }
        let mut spec = LatticeSpec {
            cutoff,
            half: Vec::new(),
            neg: Vec::with_capacity(modes.len()),
            norm: modes.iter().map(|k| k.norm()).collect(),
            norm2: modes.iter().map(|k| k.norm2() as f64).collect(),
            modes,
            grid,
        };
        for i in 0..spec.modes.len() {
            let k = spec.modes[i];
            spec.neg.push(spec.index_of(-k).expect("lattice is symmetric"));
            if k.k1 > 0 || (k.k1 == 0 && k.k2 > 0) {
                spec.half.push(i);
            }
        }
        Ok(spec)
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Number of modes `M`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Momentum] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> Momentum {
        self.modes[i]
    }

    /// Indices of the half lattice, one representative per pair `{k, −k}`.
    pub fn half_lattice(&self) -> &[usize] {
        &self.half
    }

    /// Index of `k`, if it lies on the lattice.
    pub fn index_of(&self, k: Momentum) -> Option<usize> {
        let n = self.cutoff as i32;
        if k.k1.abs() > n || k.k2.abs() > n {
            return None;
        }
        let side = (2 * n + 1) as usize;
        let v = self.grid[((k.k1 + n) as usize) * side + (k.k2 + n) as usize];
        (v >= 0).then_some(v as usize)
    }

    /// Index of `−k` for the mode at index `i`.
    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.norm[i]
    }

    pub fn norm2(&self, i: usize) -> f64 {
        self.norm2[i]
    }

    /// Index of `modes[i] + modes[j]`, if on the lattice.
    pub fn sum_index(&self, i: usize, j: usize) -> Option<usize> {
        self.index_of(self.modes[i] + self.modes[j])
    }

    /// Interaction kernel between two lattice modes given by index.
    pub fn kernel_idx(&self, i: usize, j: usize) -> f64 {
        kernel_raw(self.cutoff, self.modes[i], self.modes[j])
    }
}

/// `c(x,y)/(2π|x||y|)` with the cutoff indicators, for nonzero `x`, `y`.
pub(crate) fn kernel_raw(cutoff: u32, x: Momentum, y: Momentum) -> f64 {
    let n2 = (cutoff as i64) * (cutoff as i64);
    let (x2, y2) = (x.norm2(), y.norm2());
    if x2 > n2 || y2 > n2 || (x + y).norm2() > n2 {
        return 0.0;
    }
    let c = (x.k2 as i64 * y.k2 as i64 - x.k1 as i64 * y.k1 as i64) as f64;
    c / (2.0 * PI * ((x2 * y2) as f64).sqrt())
}

/// Interaction kernel `K_{x,y}` of the regularized nonlinearity.
pub fn kernel_k(spec: &LatticeSpec, x: Momentum, y: Momentum) -> Result<f64> {
    if x.is_zero() || y.is_zero() {
        return domain("kernel_K is undefined at zero momentum");
    }
    Ok(kernel_raw(spec.cutoff, x, y))
}

/// Logarithmic profile `L^N(x) = (c / log N²)·log(1 + N²/x)`, defined for `x ≥ 1/2`.
pub fn ln_profile(cutoff: u32, c_const: f64, x: f64) -> Result<f64> {
    if cutoff < 2 {
        return domain("ln_profile needs N ≥ 2");
    }
    if !(x >= 0.5) {
        return domain(format!("ln_profile needs x ≥ 1/2, got {x}"));
    }
    Ok(ln_profile_unchecked(cutoff, c_const, x))
}

pub(crate) fn ln_profile_unchecked(cutoff: u32, c_const: f64, x: f64) -> f64 {
    let n2 = (cutoff as f64) * (cutoff as f64);
    c_const / n2.ln() * (n2 / x).ln_1p()
}

/// Coupling constants at a given cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub lambda_hat: f64,
    pub cutoff: u32,
    /// `λ̂ / √(log N)`.
    pub lambda_n: f64,
    /// `λ̂² / π`.
    pub c_const: f64,
    /// `√(2c + 1)`.
    pub nu_eff: f64,
}

impl Coupling {
    /// `L^N(x)` for this coupling.
    pub fn profile(&self, x: f64) -> Result<f64> {
        ln_profile(self.cutoff, self.c_const, x)
    }

    pub(crate) fn profile_unchecked(&self, x: f64) -> f64 {
        ln_profile_unchecked(self.cutoff, self.c_const, x)
    }
}

/// Builds the coupling constants. `λ̂ = 0` is accepted as the linear baseline.
pub fn coupling_of(lambda_hat: f64, cutoff: u32) -> Result<Coupling> {
    if cutoff <= 1 {
        return domain("coupling needs N ≥ 2 so that log N > 0");
    }
    if !(lambda_hat >= 0.0) || !lambda_hat.is_finite() {
        return domain(format!("lambda_hat must be finite and nonnegative, got {lambda_hat}"));
    }
    let c_const = lambda_hat * lambda_hat / PI;
    Ok(Coupling {
        lambda_hat,
        cutoff,
        lambda_n: lambda_hat / (cutoff as f64).ln().sqrt(),
        c_const,
        nu_eff: (2.0 * c_const + 1.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts_and_symmetry() {
        let spec = LatticeSpec::new(2).unwrap();
        assert_eq!(spec.len(), 12);
        assert_eq!(spec.half_lattice().len(), 6);
        for i in 0..spec.len() {
            assert_eq!(spec.mode(spec.neg(i)), -spec.mode(i));
            assert_eq!(spec.index_of(spec.mode(i)), Some(i));
        }
        let w = spec.modes().windows(2).all(|w| w[0] < w[1]);
        assert!(w, "modes must be lexicographically ordered");
    }

    #[test]
    fn profile_rejects_small_argument() {
        assert!(ln_profile(4, 1.0, 0.4).is_err());
        assert!(ln_profile(1, 1.0, 1.0).is_err());
    }
}
