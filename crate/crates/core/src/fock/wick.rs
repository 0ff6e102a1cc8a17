//! Pairing graphs, Wick products of chaos variables and Feynman graphs.

use num_complex::Complex64;

use crate::error::{config, Result};
use crate::fock::kernel::{ChaosKernel, FockVector, Support};
use crate::util::{binomial, permutations};

/// Disjoint edges between `{(1,i)}_{i<n}` and `{(2,j)}_{j<m}` (0-based positions).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairingGraph {
    pub n: usize,
    pub m: usize,
    /// Edges `(i, j)` joining `(1,i)` to `(2,j)`, sorted by `i`.
    pub edges: Vec<(usize, usize)>,
}

impl PairingGraph {
    /// Unpaired positions of the first set.
    pub fn free_first(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.edges.iter().any(|e| e.0 == *i)).collect()
    }

    /// Unpaired positions of the second set.
    pub fn free_second(&self) -> Vec<usize> {
        (0..self.m).filter(|j| !self.edges.iter().any(|e| e.1 == *j)).collect()
    }

    /// Number of free vertices `|V[G]|`.
    pub fn free_count(&self) -> usize {
        self.n + self.m - 2 * self.edges.len()
    }
}

/// All graphs in `𝒢[n, m]`.
pub fn enumerate_pairings(n: usize, m: usize) -> Vec<PairingGraph> {
    fn rec(i: usize, n: usize, m: usize, used: &mut Vec<bool>, edges: &mut Vec<(usize, usize)>, out: &mut Vec<PairingGraph>) {
        if i == n {
            out.push(PairingGraph { n, m, edges: edges.clone() });
            return;
        }
        rec(i + 1, n, m, used, edges, out);
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                edges.push((i, j));
                rec(i + 1, n, m, used, edges, out);
                edges.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut vec![false; m], &mut Vec::new(), &mut out);
    out
}

/// Closed-form size of `𝒢[n, m]`: `Σ_r C(n,r)·C(m,r)·r!`.
pub fn pairing_count(n: usize, m: usize) -> u64 {
    (0..=n.min(m))
        .map(|r| (binomial(n, r) * binomial(m, r) * (1..=r).product::<usize>() as f64).round() as u64)
        .sum()
}

/// Chaos decomposition of `I_n(f)·I_m(g)`, one symmetrized kernel per resulting order.
pub fn wick_product_pair(f: &ChaosKernel, g: &ChaosKernel) -> Result<FockVector> {
    if **f.spec() != **g.spec() {
        return config("kernels live on different lattices");
    }
    let spec = f.spec().clone();
    let (n, m) = (f.order(), g.order());
    let mut acc: Vec<Option<ChaosKernel>> = vec![None; n + m + 1];
    for graph in enumerate_pairings(n, m) {
        let (free1, free2) = (graph.free_first(), graph.free_second());
        let r = graph.edges.len();
        let q = free1.len() + free2.len();
        let mdim = spec.len();
        let term = ChaosKernel::from_fn(spec.clone(), q, Support::General, |out| {
            let mut a1 = vec![0usize; n];
            let mut a2 = vec![0usize; m];
            for (p, &pos) in free1.iter().enumerate() {
                a1[pos] = out[p];
            }
            for (p, &pos) in free2.iter().enumerate() {
                a2[pos] = out[free1.len() + p];
            }
            let mut s = vec![0usize; r];
            let mut total = Complex64::new(0.0, 0.0);
            loop {
                for (e, &(i, j)) in graph.edges.iter().enumerate() {
                    a1[i] = s[e];
                    a2[j] = spec.neg(s[e]);
                }
                total += f.get(&a1) * g.get(&a2);
                // Advance the contracted momenta.
                let mut d = r;
                loop {
                    if d == 0 {
                        return total;
                    }
                    d -= 1;
                    s[d] += 1;
                    if s[d] < mdim {
                        break;
                    }
                    s[d] = 0;
                }
            }
        })?;
        match &mut acc[q] {
            Some(k) => k.axpy(Complex64::new(1.0, 0.0), &term)?,
            slot @ None => *slot = Some(term),
        }
    }
    let mut out = FockVector::new(spec);
    for k in acc.into_iter().flatten() {
        out.set(k.symmetrize())?;
    }
    Ok(out)
}

/// Vertex `(u, i)` of a Feynman graph, `u ∈ {1,2,3,4}`.
pub type Vertex = (u8, usize);

/// Graph `γ = G ∪ G̃ ∪ P ∪ {((1,0),(2,0)), ((3,0),(4,0))}`.
///
/// `G ∈ 𝒢[j₁−1, j₂−1]` joins `V₁` to `V₂` (indices from 1), its mirror `G̃` joins
/// `V₃` to `V₄`, and `P` is a bijection from `V[G]` onto `V[G̃]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeynmanGraph {
    pub j1: usize,
    pub j2: usize,
    pub base: PairingGraph,
    /// Edges of `P`, from a free vertex of `G` to a free vertex of `G̃`.
    pub cross: Vec<(Vertex, Vertex)>,
}

impl FeynmanGraph {
    fn free_vertices(&self, mirror: bool) -> Vec<Vertex> {
        let (a, b) = if mirror { (3, 4) } else { (1, 2) };
        let mut v: Vec<Vertex> = self.base.free_first().into_iter().map(|i| (a, i + 1)).collect();
        v.extend(self.base.free_second().into_iter().map(|j| (b, j + 1)));
        v
    }

    /// Full edge set of `γ`.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut e: Vec<(Vertex, Vertex)> = vec![((1, 0), (2, 0)), ((3, 0), (4, 0))];
        for &(i, j) in &self.base.edges {
            e.push(((1, i + 1), (2, j + 1)));
            e.push(((3, i + 1), (4, j + 1)));
        }
        e.extend(self.cross.iter().copied());
        e
    }

    /// All vertices `V₁ ∪ … ∪ V₄` including the special ones.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut v = Vec::new();
        for u in 1..=4u8 {
            let len = if u % 2 == 1 { self.j1 } else { self.j2 };
            v.extend((0..len).map(|i| (u, i)));
        }
        v
    }

    /// Checks that `P` is a bijection `V[G] → V[G̃]` and that `γ` is a perfect matching.
    pub fn is_valid(&self) -> bool {
        let free = self.free_vertices(false);
        let mirror = self.free_vertices(true);
        if free.is_empty() || self.cross.len() != free.len() {
            return false;
        }
        let mut src: Vec<Vertex> = self.cross.iter().map(|e| e.0).collect();
        let mut dst: Vec<Vertex> = self.cross.iter().map(|e| e.1).collect();
        src.sort();
        dst.sort();
        let (mut f, mut m) = (free, mirror);
        f.sort();
        m.sort();
        if src != f || dst != m {
            return false;
        }
        let mut touched: Vec<Vertex> = self.edges().iter().flat_map(|e| [e.0, e.1]).collect();
        touched.sort();
        let mut all = self.vertices();
        all.sort();
        touched == all
    }
}

/// All graphs of the form `γ` with `P` nonempty, for `j₁, j₂ ≥ 1`.
pub fn enumerate_feynman(j1: usize, j2: usize) -> Vec<FeynmanGraph> {
    let mut out = Vec::new();
    if j1 == 0 || j2 == 0 {
        return out;
    }
    for base in enumerate_pairings(j1 - 1, j2 - 1) {
        let proto = FeynmanGraph { j1, j2, base, cross: Vec::new() };
        let free = proto.free_vertices(false);
        if free.is_empty() {
            continue;
        }
        let mirror = proto.free_vertices(true);
        for p in permutations(free.len()) {
            let cross = free.iter().zip(p.iter()).map(|(&a, &b)| (a, mirror[b])).collect();
            out.push(FeynmanGraph { cross, ..proto.clone() });
        }
    }
    out
}
