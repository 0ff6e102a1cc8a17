//! Invariant checks run by the `selftest` experiment.

use std::sync::Arc;

use akpz::fock::{
    enumerate_pairings, evaluate_chaos, factorial, fock_inner, random_kernel, sample_noise, ChaosKernel, FockVector,
    Support,
};
use akpz::generator::{apply_aminus, apply_aplus};
use akpz::lattice::{coupling_of, LatticeSpec, Momentum};
use akpz::sim::{
    estimate_dbulk, init_stationary, modal_second_moments, nonlinearity_direct, nonlinearity_transform, SimConfig,
};
use akpz::util::{binomial, derive_seed, mean_and_se};
use num_complex::Complex64;

use crate::config::SelftestParams;
use crate::error::CliError;
use crate::output::Table;

struct Check {
    name: String,
    value: f64,
    threshold: f64,
}

/// Runs every check; the second value names the failures.
pub fn run(p: &SelftestParams, seed: u64) -> Result<(Table, Vec<String>), CliError> {
    let mut checks = Vec::new();
    adjointness(p.corrupt_symmetry, seed, &mut checks)?;
    wick_counts(&mut checks);
    nonlinearity(seed, &mut checks)?;
    stationarity(p.replicas, seed, &mut checks)?;
    dbulk_free(seed, &mut checks)?;
    isometry(seed, &mut checks)?;
    let mut t = Table::new("selftest");
    let mut failures = Vec::new();
    for c in checks {
        let passed = c.value <= c.threshold;
        if !passed {
            failures.push(c.name.clone());
        }
        t.push(vec![c.name.as_str().into(), passed.into(), c.value.into(), c.threshold.into()]);
    }
    Ok((t, failures))
}

fn single(k: ChaosKernel) -> FockVector {
    FockVector::single(k)
}

/// Adds an entry to `f` at `(a, b, …)` without its permutations, keeping the reality condition.
fn break_symmetry(f: &mut ChaosKernel) {
    let sp = f.spec().clone();
    let a = sp.index_of(Momentum::new(1, 0)).expect("(1,0) lies in every lattice");
    let b = sp.index_of(Momentum::new(0, 1)).expect("(0,1) lies in every lattice");
    let mut idx = vec![a; f.order()];
    idx[1] = b;
    let mirror: Vec<usize> = idx.iter().map(|&i| sp.neg(i)).collect();
    let bump = Complex64::new(5.0, 0.0);
    f.set(&idx, f.get(&idx) + bump);
    f.set(&mirror, f.get(&mirror) + bump);
}

fn adjointness(corrupt: bool, seed: u64, out: &mut Vec<Check>) -> Result<(), CliError> {
    for cut in [2u32, 3] {
        let sp = Arc::new(LatticeSpec::new(cut)?);
        let c = coupling_of(1.0, cut)?;
        for order in [1usize, 2] {
            let mut worst: f64 = 0.0;
            let mut sym: f64 = 0.0;
            for s in 0..3u64 {
                let mut f = random_kernel(sp.clone(), order, Support::General, derive_seed(seed, 10 * s + order as u64))?;
                if corrupt && order >= 2 {
                    break_symmetry(&mut f);
                }
                let g = random_kernel(sp.clone(), order + 1, Support::General, derive_seed(seed ^ 0xad, s))?;
                let up = apply_aplus(&c, &f)?;
                let down = apply_aminus(&c, &g)?;
                sym = sym.max(up.symmetry_defect()).max(down.symmetry_defect());
                let lhs = fock_inner(&single(g.clone()), &single(up))?;
                let rhs = -fock_inner(&single(down), &single(f.clone()))?;
                let scale = (factorial(order + 1) * g.norm_sqr() * factorial(order) * f.norm_sqr()).sqrt();
                worst = worst.max((lhs - rhs).abs() / scale);
            }
            out.push(Check { name: format!("adjointness N={cut} orders {order},{}", order + 1), value: worst, threshold: 1e-10 });
            out.push(Check { name: format!("output symmetry N={cut} orders {order},{}", order + 1), value: sym, threshold: 1e-12 });
        }
    }
    Ok(())
}

fn wick_counts(out: &mut Vec<Check>) {
    let mut worst: f64 = 0.0;
    for n in 0..=4 {
        for m in 0..=4 {
            let formula: f64 = (0..=n.min(m)).map(|r| binomial(n, r) * binomial(m, r) * factorial(r)).sum();
            worst = worst.max((enumerate_pairings(n, m).len() as f64 - formula).abs());
        }
    }
    out.push(Check { name: "wick pairing counts".into(), value: worst, threshold: 0.0 });
}

fn nonlinearity(seed: u64, out: &mut Vec<Check>) -> Result<(), CliError> {
    let sp = Arc::new(LatticeSpec::new(8)?);
    let c = coupling_of(1.0, 8)?;
    let mut worst: f64 = 0.0;
    for s in 0..10 {
        let st = init_stationary(sp.clone(), derive_seed(seed ^ 0x1f, s));
        let d = nonlinearity_direct(&st, &c);
        let t = nonlinearity_transform(&st, &c)?;
        let scale = d.modes.iter().map(|z| z.norm()).fold(d.zero_mode.abs(), f64::max);
        let diff =
            d.modes.iter().zip(&t.modes).map(|(x, y)| (x - y).norm()).fold((d.zero_mode - t.zero_mode).abs(), f64::max);
        worst = worst.max(diff / scale);
    }
    out.push(Check { name: "direct vs transform nonlinearity".into(), value: worst, threshold: 1e-10 });
    Ok(())
}

fn stationarity(replicas: usize, seed: u64, out: &mut Vec<Check>) -> Result<(), CliError> {
    let mut cfg = SimConfig::new(coupling_of(1.0, 8)?);
    cfg.horizon = 0.25;
    cfg.replicas = replicas;
    cfg.seed = seed;
    cfg.record_times = vec![0.25];
    let half = LatticeSpec::new(8)?.half_lattice().to_vec();
    let modes: Vec<usize> = (0..5).map(|i| half[i * half.len() / 5]).collect();
    let worst = modal_second_moments(&cfg, &modes)?
        .iter()
        .map(|m| (m.mean - 1.0).abs() / m.std_error)
        .fold(0.0, f64::max);
    out.push(Check { name: "stationarity of E|u(k)|² (in standard errors)".into(), value: worst, threshold: 5.0 });
    Ok(())
}

fn dbulk_free(seed: u64, out: &mut Vec<Check>) -> Result<(), CliError> {
    let mut cfg = SimConfig::new(coupling_of(0.0, 8)?);
    cfg.horizon = 0.25;
    cfg.replicas = 4;
    cfg.seed = seed;
    cfg.record_times = vec![0.25];
    let d = estimate_dbulk(&cfg)?[0].estimate;
    out.push(Check { name: "bulk diffusion at zero coupling".into(), value: (d - 1.0).abs(), threshold: 0.0 });
    Ok(())
}

fn isometry(seed: u64, out: &mut Vec<Check>) -> Result<(), CliError> {
    let sp = Arc::new(LatticeSpec::new(2)?);
    let mut f = FockVector::new(sp.clone());
    for n in 0..=2 {
        f.set(random_kernel(sp.clone(), n, Support::General, derive_seed(seed ^ 0x150, n as u64))?)?;
    }
    let xs: Vec<f64> = (0..2000u64)
        .map(|s| Ok(evaluate_chaos(&f, &sample_noise(sp.clone(), derive_seed(seed ^ 0x151, s)))?.powi(2)))
        .collect::<Result<_, akpz::Error>>()?;
    let (mean, se) = mean_and_se(&xs);
    let sigmas = (mean - fock_inner(&f, &f)?).abs() / se;
    out.push(Check { name: "Itô isometry E[F²] = ‖F‖² (in standard errors)".into(), value: sigmas, threshold: 5.0 });
    Ok(())
}
