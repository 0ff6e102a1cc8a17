//! Dense chaos kernels and truncated Fock vectors.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{config, domain, Error, Result};
use crate::lattice::{LatticeSpec, Momentum};

/// Largest number of stored entries a kernel may allocate.
pub const MAX_ENTRIES: usize = 1 << 27;

const CHUNK: usize = 1 << 12;

/// Storage layout of a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    /// One entry per `n`-tuple of modes.
    General,
    /// Vanishes unless `Σ kᵢ = 0`; one entry per `(n−1)`-tuple, the last momentum derived.
    ZeroSum,
}

/// Complex kernel on `n`-tuples of lattice modes, indexed row-major with the last argument fastest.
#[derive(Clone, Debug)]
pub struct ChaosKernel {
    spec: Arc<LatticeSpec>,
    order: usize,
    support: Support,
    data: Vec<Complex64>,
}

impl ChaosKernel {
    /// Zero kernel. Zero-sum storage requires `order ≥ 2`.
    pub fn zeros(spec: Arc<LatticeSpec>, order: usize, support: Support) -> Result<Self> {
        if support == Support::ZeroSum && order < 2 {
            return domain("zero-sum storage needs order ≥ 2");
        }
        let stored = match support {
            Support::General => order,
            Support::ZeroSum => order - 1,
        };
        let len = (spec.len() as u128).pow(stored as u32);
        if len > MAX_ENTRIES as u128 {
            return Err(Error::Unsupported(format!(
                "kernel of order {order} at N = {} needs {len} entries (limit {MAX_ENTRIES})",
                spec.cutoff()
            )));
        }
        Ok(ChaosKernel { spec, order, support, data: vec![Complex64::new(0.0, 0.0); len as usize] })
    }

    /// Order-0 kernel holding a constant.
    pub fn scalar(spec: Arc<LatticeSpec>, value: Complex64) -> Self {
        ChaosKernel { spec, order: 0, support: Support::General, data: vec![value] }
    }

    /// Kernel whose entries on the support are `f(tuple)`, filled in parallel.
    pub fn from_fn<F>(spec: Arc<LatticeSpec>, order: usize, support: Support, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Complex64 + Sync,
    {
        let mut k = Self::zeros(spec, order, support)?;
        k.fill(f);
        Ok(k)
    }

    /// Overwrites every supported entry with `f(tuple)`.
    pub fn fill<F>(&mut self, f: F)
    where
        F: Fn(&[usize]) -> Complex64 + Sync,
    {
        let (spec, order, support) = (self.spec.clone(), self.order, self.support);
        let m = spec.len();
        let layout = Layout { spec: &spec, order, support, m };
        self.data.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let mut idx = vec![0usize; order];
            let start = c * CHUNK;
            layout.decode_digits(start, &mut idx);
            for (o, slot) in chunk.iter_mut().enumerate() {
                if o > 0 {
                    layout.increment(&mut idx);
                }
                *slot = if layout.complete(&mut idx) { f(&idx) } else { Complex64::new(0.0, 0.0) };
            }
        });
    }

    pub fn spec(&self) -> &Arc<LatticeSpec> {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Raw stored entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    fn layout(&self) -> Layout<'_> {
        Layout { spec: &self.spec, order: self.order, support: self.support, m: self.spec.len() }
    }

    /// Value at a full tuple of mode indices.
    pub fn get(&self, idx: &[usize]) -> Complex64 {
        debug_assert_eq!(idx.len(), self.order);
        match self.flat_index(idx) {
            Some(f) => self.data[f],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Value at a tuple of momenta; zero off the lattice.
    pub fn get_momenta(&self, ks: &[Momentum]) -> Complex64 {
        let idx: Option<Vec<usize>> = ks.iter().map(|&k| self.spec.index_of(k)).collect();
        idx.map_or(Complex64::new(0.0, 0.0), |i| self.get(&i))
    }

    /// Storage position of a full tuple, `None` off the support.
    pub fn flat_index(&self, idx: &[usize]) -> Option<usize> {
        let m = self.spec.len();
        match self.support {
            Support::General => Some(idx.iter().fold(0usize, |acc, &i| acc * m + i)),
            Support::ZeroSum => {
                let (head, last) = idx.split_at(self.order - 1);
                let s = head.iter().fold(Momentum::ZERO, |acc, &i| acc + self.spec.mode(i));
                if s + self.spec.mode(last[0]) != Momentum::ZERO {
                    return None;
                }
                Some(head.iter().fold(0usize, |acc, &i| acc * m + i))
            }
        }
    }

    /// Sets the value at a tuple on the support; returns false off the support.
    pub fn set(&mut self, idx: &[usize], value: Complex64) -> bool {
        match self.flat_index(idx) {
            Some(f) => {
                self.data[f] = value;
                true
            }
            None => false,
        }
    }

    /// Calls `f(tuple, value)` for every supported entry.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], Complex64)) {
        let layout = self.layout();
        let mut idx = vec![0usize; self.order];
        for (p, v) in self.data.iter().enumerate() {
            if p > 0 {
                layout.increment(&mut idx);
            }
            if layout.complete(&mut idx) {
                f(&idx, *v);
            }
        }
    }

    /// Parallel sum of `f(tuple, value)` over supported entries.
    pub fn par_sum<F>(&self, f: F) -> Complex64
    where
        F: Fn(&[usize], Complex64) -> Complex64 + Sync,
    {
        let layout = self.layout();
        self.data
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut idx = vec![0usize; self.order];
                layout.decode_digits(c * CHUNK, &mut idx);
                let mut acc = Complex64::new(0.0, 0.0);
                for (o, v) in chunk.iter().enumerate() {
                    if o > 0 {
                        layout.increment(&mut idx);
                    }
                    if layout.complete(&mut idx) {
                        acc += f(&idx, *v);
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    }

    /// Momenta of a tuple of indices.
    pub fn momenta(&self, idx: &[usize]) -> Vec<Momentum> {
        idx.iter().map(|&i| self.spec.mode(i)).collect()
    }

    /// Same values in general (uncompressed) storage.
    pub fn to_general(&self) -> Result<Self> {
        match self.support {
            Support::General => Ok(self.clone()),
            Support::ZeroSum => {
                let src = self;
                Self::from_fn(self.spec.clone(), self.order, Support::General, |idx| src.get(idx))
            }
        }
    }

    /// Compresses to zero-sum storage; fails if mass lies off `Σ kᵢ = 0`.
    pub fn to_zero_sum(&self) -> Result<Self> {
        if self.support == Support::ZeroSum {
            return Ok(self.clone());
        }
        let mut off = 0.0;
        self.for_each(|idx, v| {
            let s = idx.iter().fold(Momentum::ZERO, |acc, &i| acc + self.spec.mode(i));
            if s != Momentum::ZERO {
                off += v.norm_sqr();
            }
        });
        if off > 0.0 {
            return domain("kernel has mass off the zero-sum set");
        }
        let src = self;
        Self::from_fn(self.spec.clone(), self.order, Support::ZeroSum, |idx| src.get(idx))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if *self.spec != *other.spec {
            return config("kernels live on different lattices");
        }
        if self.order != other.order {
            return config(format!("order mismatch: {} vs {}", self.order, other.order));
        }
        Ok(())
    }

    /// `Σ_k f(k)·conj(g(k))` without the factorial weight.
    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        self.check_compatible(other)?;
        if self.support == other.support {
            return Ok(self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(a, b)| a * b.conj())
                .sum());
        }
        let (sparse, dense, swap) = if self.support == Support::ZeroSum { (self, other, false) } else { (other, self, true) };
        let s = sparse.par_sum(|idx, v| {
            let w = dense.get(idx);
            if swap {
                w * v.conj()
            } else {
                v * w.conj()
            }
        });
        Ok(s)
    }

    /// `Σ_k |f(k)|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.data.par_iter().map(|v| v.norm_sqr()).sum()
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: Complex64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        if self.support == other.support {
            self.data.par_iter_mut().zip(other.data.par_iter()).for_each(|(x, y)| *x += a * y);
            return Ok(());
        }
        if self.support == Support::ZeroSum {
            return config("cannot add a general kernel into zero-sum storage");
        }
        other.for_each(|idx, v| {
            let f = self.flat_index(idx).expect("general storage");
            self.data[f] += a * v;
        });
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.data.par_iter_mut().for_each(|x| *x *= a);
    }

    /// Multiplies every entry by `w(tuple)`.
    pub fn multiply_by<F>(&mut self, w: F)
    where
        F: Fn(&[usize]) -> f64 + Sync,
    {
        self.map_in_place(|idx, v| v * w(idx));
    }

    /// Replaces every supported entry `v` at `tuple` by `f(tuple, v)`.
    pub fn map_in_place<F>(&mut self, f: F)
    where
        F: Fn(&[usize], Complex64) -> Complex64 + Sync,
    {
        let spec = self.spec.clone();
        let layout = Layout { spec: &spec, order: self.order, support: self.support, m: spec.len() };
        let order = self.order;
        self.data.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let mut idx = vec![0usize; order];
            layout.decode_digits(c * CHUNK, &mut idx);
            for (o, slot) in chunk.iter_mut().enumerate() {
                if o > 0 {
                    layout.increment(&mut idx);
                }
                if layout.complete(&mut idx) {
                    *slot = f(&idx, *slot);
                }
            }
        });
    }

    /// Average over all permutations of the arguments.
    pub fn symmetrize(&self) -> Self {
        // Slot k is averaged over the coset representatives (i k) of S_{k−1} in S_k.
        let mut cur = self.clone();
        for k in 2..=self.order {
            let src = cur.clone();
            let inv = 1.0 / k as f64;
            cur.fill(|idx| {
                let mut store = [0usize; 16];
                let buf = &mut store[..idx.len()];
                buf.copy_from_slice(idx);
                let mut acc = src.get(buf);
                for i in 0..k - 1 {
                    buf.swap(i, k - 1);
                    acc += src.get(buf);
                    buf.swap(i, k - 1);
                }
                acc * inv
            });
        }
        cur
    }

    /// Imposes `f(−k) = conj f(k)` by averaging the two sides.
    pub fn realify(&self) -> Self {
        let src = self;
        let spec = self.spec.clone();
        let mut out = self.clone();
        out.fill(|idx| {
            let mut store = [0usize; 16];
            let mirror = &mut store[..idx.len()];
            for (m, &i) in mirror.iter_mut().zip(idx) {
                *m = spec.neg(i);
            }
            0.5 * (src.get(idx) + src.get(mirror).conj())
        });
        out
    }

    /// Largest violation of permutation symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let sym = self.symmetrize();
        self.data.iter().zip(sym.data.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `f(−k) = conj f(k)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        self.for_each(|idx, v| {
            let mirror: Vec<usize> = idx.iter().map(|&i| self.spec.neg(i)).collect();
            worst = worst.max((v - self.get(&mirror).conj()).norm());
        });
        worst
    }

    /// Writes nonzero entries as CSV rows `k1_1, k1_2, …, kn_1, kn_2, re, im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = Vec::new();
        for a in 1..=self.order {
            header.push(format!("k{a}_1"));
            header.push(format!("k{a}_2"));
        }
        header.push("re".into());
        header.push("im".into());
        out.write_record(&header)?;
        let mut rows = Vec::new();
        self.for_each(|idx, v| {
            if v.norm_sqr() > 0.0 {
                let mut row: Vec<String> = Vec::with_capacity(2 * idx.len() + 2);
                for &i in idx {
                    let k = self.spec.mode(i);
                    row.push(k.k1.to_string());
                    row.push(k.k2.to_string());
                }
                row.push(format!("{:.17e}", v.re));
                row.push(format!("{:.17e}", v.im));
                rows.push(row);
            }
        });
        for row in rows {
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Index arithmetic shared by the iterators.
struct Layout<'a> {
    spec: &'a LatticeSpec,
    order: usize,
    support: Support,
    m: usize,
}

impl Layout<'_> {
    fn stored(&self) -> usize {
        match self.support {
            Support::General => self.order,
            Support::ZeroSum => self.order - 1,
        }
    }

    fn decode_digits(&self, mut flat: usize, idx: &mut [usize]) {
        for d in (0..self.stored()).rev() {
            idx[d] = flat % self.m;
            flat /= self.m;
        }
    }

    fn increment(&self, idx: &mut [usize]) {
        for d in (0..self.stored()).rev() {
            idx[d] += 1;
            if idx[d] < self.m {
                return;
            }
            idx[d] = 0;
        }
    }

    /// Derives the last index of a zero-sum tuple; false if it falls off the lattice.
    fn complete(&self, idx: &mut [usize]) -> bool {
        if self.support == Support::General {
            return true;
        }
        let s = idx[..self.order - 1].iter().fold(Momentum::ZERO, |acc, &i| acc + self.spec.mode(i));
        match self.spec.index_of(-s) {
            Some(last) => {
                idx[self.order - 1] = last;
                true
            }
            None => false,
        }
    }
}

/// Chaos components of orders `0..` on a common lattice.
#[derive(Clone, Debug)]
pub struct FockVector {
    spec: Arc<LatticeSpec>,
    components: Vec<Option<ChaosKernel>>,
}

impl FockVector {
    pub fn new(spec: Arc<LatticeSpec>) -> Self {
        FockVector { spec, components: Vec::new() }
    }

    /// Vector with a single component.
    pub fn single(kernel: ChaosKernel) -> Self {
        let mut v = FockVector::new(kernel.spec.clone());
        v.set(kernel).expect("same lattice");
        v
    }

    pub fn spec(&self) -> &Arc<LatticeSpec> {
        &self.spec
    }

    /// Stores a component, replacing any kernel of the same order.
    pub fn set(&mut self, kernel: ChaosKernel) -> Result<()> {
        if *kernel.spec != *self.spec {
            return config("component lives on a different lattice");
        }
        let n = kernel.order;
        if self.components.len() <= n {
            self.components.resize(n + 1, None);
        }
        self.components[n] = Some(kernel);
        Ok(())
    }

    /// Adds a kernel into the component of its order.
    pub fn add(&mut self, kernel: ChaosKernel) -> Result<()> {
        let n = kernel.order;
        match self.component_mut(n) {
            Some(existing) => {
                if existing.support == Support::ZeroSum && kernel.support == Support::General {
                    let mut g = existing.to_general()?;
                    g.axpy(Complex64::new(1.0, 0.0), &kernel)?;
                    *existing = g;
                    Ok(())
                } else {
                    existing.axpy(Complex64::new(1.0, 0.0), &kernel)
                }
            }
            None => self.set(kernel),
        }
    }

    pub fn component(&self, n: usize) -> Option<&ChaosKernel> {
        self.components.get(n).and_then(|c| c.as_ref())
    }

    pub fn component_mut(&mut self, n: usize) -> Option<&mut ChaosKernel> {
        self.components.get_mut(n).and_then(|c| c.as_mut())
    }

    /// Highest order slot present.
    pub fn max_order(&self) -> Option<usize> {
        self.components.iter().rposition(|c| c.is_some())
    }

    /// Present components in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = &ChaosKernel> {
        self.components.iter().flatten()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut ChaosKernel> {
        self.components.iter_mut().flatten()
    }

    pub fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|k| k.scale(a));
    }
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Weighted inner product `Σ_n n!·Σ f_n·conj(g_n)`, complex-valued.
pub fn fock_inner_complex(f: &FockVector, g: &FockVector) -> Result<Complex64> {
    if *f.spec != *g.spec {
        return config("Fock vectors live on different lattices");
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in f.iter() {
        if let Some(b) = g.component(a.order) {
            acc += factorial(a.order) * a.dot(b)?;
        }
    }
    Ok(acc)
}

/// Real part of the Fock inner product; exact for kernels obeying the reality condition.
pub fn fock_inner(f: &FockVector, g: &FockVector) -> Result<f64> {
    Ok(fock_inner_complex(f, g)?.re)
}

/// Random kernel that is symmetric and satisfies the reality condition.
pub fn random_kernel(spec: Arc<LatticeSpec>, order: usize, support: Support, seed: u64) -> Result<ChaosKernel> {
    let mut k = ChaosKernel::zeros(spec, order, support)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in k.data.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v = Complex64::new(re, im);
    }
    if order == 0 {
        k.data[0].im = 0.0;
        return Ok(k);
    }
    // Off-support slots of zero-sum storage must stay empty.
    let src = k.clone();
    k.fill(|idx| src.get(idx));
    Ok(k.realify().symmetrize())
}
