//! Scalar recursions `G_j`, their fixed point, the simplex functions `G⁺` and the sums `S_n`.
//!
//! Every table lives on a uniform grid `x_i = i·h` and is built by cumulative
//! trapezoid quadrature; lookups interpolate linearly.

use std::io::Write;

use crate::error::{config, domain, Result};
use crate::lattice::Coupling;

/// Default quadrature step.
pub const DEFAULT_GRID_STEP: f64 = 1e-4;
/// Default largest recursion index.
pub const DEFAULT_J_MAX: usize = 64;

/// Uniform grid shared by all tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    step: f64,
    len: usize,
}

impl Grid {
    fn new(x_max: f64, step: f64) -> Result<Self> {
        if !(x_max > 0.0) || !(step > 0.0) || !x_max.is_finite() {
            return domain("grid needs x_max > 0 and step > 0");
        }
        let len = (x_max / step - 1e-9).ceil() as usize + 1;
        Ok(Grid { step, len })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len - 1)
    }

    fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        if !(x >= 0.0) || x > self.x_max() * (1.0 + 1e-12) {
            return domain(format!("x = {x} outside table range [0, {}]", self.x_max()));
        }
        let s = x / self.step;
        let i = (s.floor() as usize).min(self.len - 2);
        let t = s - i as f64;
        Ok(values[i] * (1.0 - t) + values[i + 1] * t)
    }

    /// Cumulative trapezoid of `f` sampled on the grid.
    fn integrate(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        let mut acc = 0.0;
        let mut prev = f(0);
        out.push(0.0);
        for i in 1..self.len {
            let cur = f(i);
            acc += 0.5 * self.step * (prev + cur);
            out.push(acc);
            prev = cur;
        }
        out
    }
}

/// Tabulated `G_2, …, G_{j_max}` with `G_2 ≡ 0` and `G_j(x) = ∫₀ˣ dy / (1 + G_{j−1}(y))`.
#[derive(Clone, Debug)]
pub struct GTable {
    grid: Grid,
    values: Vec<Vec<f64>>,
}

/// Builds `G_2..G_{j_max}` on `[0, x_max]`.
pub fn build_g_table(j_max: usize, x_max: f64, grid_step: f64) -> Result<GTable> {
    if j_max < 2 {
        return domain("j_max must be at least 2");
    }
    let grid = Grid::new(x_max, grid_step)?;
    let mut values = vec![vec![0.0; grid.len()]];
    for _ in 3..=j_max {
        let prev = values.last().expect("nonempty");
        let next = grid.integrate(|i| 1.0 / (1.0 + prev[i]));
        values.push(next);
    }
    Ok(GTable { grid, values })
}

impl GTable {
    /// Table covering `[0, max(2c, 1) + 1/2]` at the default step.
    pub fn for_coupling(coupling: &Coupling, j_max: usize) -> Result<Self> {
        build_g_table(j_max, (2.0 * coupling.c_const).max(1.0) + 0.5, DEFAULT_GRID_STEP)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_max(&self) -> usize {
        self.values.len() + 1
    }

    /// Samples of `G_j` on the grid.
    pub fn values(&self, j: usize) -> Result<&[f64]> {
        if j < 2 || j > self.j_max() {
            return config(format!("G_{j} not tabulated (have 2..={})", self.j_max()));
        }
        Ok(&self.values[j - 2])
    }

    /// `G_j(x)` by linear interpolation.
    pub fn g(&self, j: usize, x: f64) -> Result<f64> {
        self.grid.interpolate(self.values(j)?, x)
    }

    /// `|G_j(x) − G(x)|` against the fixed point.
    pub fn residual(&self, j: usize, x: f64) -> Result<f64> {
        Ok((self.g(j, x)? - g_limit(x)?).abs())
    }

    /// Writes columns `x, G_2, …, G_jmax`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["x".to_string()];
        header.extend((2..=self.j_max()).map(|j| format!("G_{j}")));
        out.write_record(&header)?;
        for i in 0..self.grid.len() {
            let mut row = vec![format!("{:.10e}", self.grid.x(i))];
            row.extend(self.values.iter().map(|v| format!("{:.16e}", v[i])));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Fixed point `G(x) = √(2x+1) − 1` of the recursion.
pub fn g_limit(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("g_limit needs x ≥ 0, got {x}"));
    }
    Ok((2.0 * x + 1.0).sqrt() - 1.0)
}

/// Tabulated `G⁺_i^m` for `i = 0..=i_max`, where `m = n + 2 − j`.
///
/// `G⁺_0 ≡ 1` and `(G⁺_i)' = G⁺_{i−1} / (1 + G_{m−1+i})²` with `G⁺_i(0) = 0`.
#[derive(Clone, Debug)]
pub struct GPlusTable {
    m: usize,
    grid: Grid,
    values: Vec<Vec<f64>>,
}

/// Builds `G⁺_i^{n+2−j}` for `i ≤ i_max` by integrating the derivative identity.
pub fn build_gplus_table(n: usize, j: usize, i_max: usize, g: &GTable) -> Result<GPlusTable> {
    if j < 1 || j > n {
        return domain(format!("need 1 ≤ j ≤ n, got j = {j}, n = {n}"));
    }
    if i_max + 1 > j {
        return domain(format!("need i_max ≤ j − 1, got i_max = {i_max}, j = {j}"));
    }
    build_gplus_by_m(n + 2 - j, i_max, g)
}

fn build_gplus_by_m(m: usize, i_max: usize, g: &GTable) -> Result<GPlusTable> {
    let grid = g.grid.clone();
    let mut values = vec![vec![1.0; grid.len()]];
    for i in 1..=i_max {
        let gi = g.values(m - 1 + i)?;
        let prev = values.last().expect("nonempty");
        let next = grid.integrate(|p| prev[p] / ((1.0 + gi[p]) * (1.0 + gi[p])));
        values.push(next);
    }
    Ok(GPlusTable { m, grid, values })
}

impl GPlusTable {
    /// Upper index `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn i_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self, i: usize) -> Result<&[f64]> {
        self.values
            .get(i)
            .map(|v| v.as_slice())
            .ok_or_else(|| crate::Error::Config(format!("G⁺_{i}^{} not tabulated", self.m)))
    }

    /// `G⁺_i^m(x)`.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        self.grid.interpolate(self.values(i)?, x)
    }
}

/// All tables needed by `S_n`: `G⁺^{n+2−j}` with `i_max = j − 1` for `j = 1..=n`.
pub fn build_gplus_set(n: usize, g: &GTable) -> Result<Vec<GPlusTable>> {
    (1..=n).map(|j| build_gplus_table(n, j, j - 1, g)).collect()
}

fn find_table(tables: &[GPlusTable], m: usize, i: usize) -> Result<&GPlusTable> {
    tables
        .iter()
        .find(|t| t.m == m && t.i_max() >= i)
        .ok_or_else(|| crate::Error::Config(format!("missing table G⁺_{i}^{m}")))
}

/// `S_n(x) = Σ_{j=1}^n G⁺_{j−1}^{n+2−j}(x)`.
pub fn s_n(n: usize, x: f64, tables: &[GPlusTable]) -> Result<f64> {
    if n == 0 {
        return domain("S_n needs n ≥ 1");
    }
    (1..=n).try_fold(0.0, |acc, j| Ok(acc + find_table(tables, n + 2 - j, j - 1)?.eval(j - 1, x)?))
}

/// Tabulated `S_1, …, S_{n_max}` on the grid of a `GTable`.
#[derive(Clone, Debug)]
pub struct SnTable {
    grid: Grid,
    values: Vec<Vec<f64>>,
}

/// Builds `S_n` for `n = 1..=n_max`; needs `G` up to index `n_max`.
pub fn build_sn_table(n_max: usize, g: &GTable) -> Result<SnTable> {
    if n_max == 0 {
        return domain("n_max must be positive");
    }
    let mut values = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let tables = build_gplus_set(n, g)?;
        let mut acc = vec![0.0; g.grid.len()];
        for j in 1..=n {
            let t = find_table(&tables, n + 2 - j, j - 1)?;
            for (a, v) in acc.iter_mut().zip(t.values(j - 1)?) {
                *a += v;
            }
        }
        values.push(acc);
    }
    Ok(SnTable { grid: g.grid.clone(), values })
}

impl SnTable {
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self, n: usize) -> Result<&[f64]> {
        if n == 0 || n > self.n_max() {
            return config(format!("S_{n} not tabulated"));
        }
        Ok(&self.values[n - 1])
    }

    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.grid.interpolate(self.values(n)?, x)
    }

    /// Writes columns `x, S_1, …, S_nmax`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["x".to_string()];
        header.extend((1..=self.n_max()).map(|n| format!("S_{n}")));
        out.write_record(&header)?;
        for i in 0..self.grid.len() {
            let mut row = vec![format!("{:.10e}", self.grid.x(i))];
            row.extend(self.values.iter().map(|v| format!("{:.16e}", v[i])));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Large-cutoff Laplace-domain bulk diffusion `ν_eff / μ²`.
pub fn predicted_laplace_dbulk(mu: f64, coupling: &Coupling) -> Result<f64> {
    if !(mu > 0.0) {
        return domain(format!("mu must be positive, got {mu}"));
    }
    Ok(coupling.nu_eff / (mu * mu))
}

/// Diagonal approximation `½·G_{n+1}(L^N(μ+1))` of the truncated resolvent pairing.
pub fn predicted_resolvent_pairing(n: usize, coupling: &Coupling, mu: f64, g: &GTable) -> Result<f64> {
    if !(mu >= 0.0) {
        return domain(format!("mu must be nonnegative, got {mu}"));
    }
    Ok(0.5 * g.g(n + 1, coupling.profile(mu + 1.0)?)?)
}
