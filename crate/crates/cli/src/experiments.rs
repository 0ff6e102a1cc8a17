//! Experiment runners. Each returns a table matching its documented schema.

use std::sync::Arc;

use akpz::fock::{
    enumerate_pairings, evaluate_chaos, factorial, fock_inner, random_kernel, sample_noise, FockVector, Support,
};
use akpz::generator::{
    gaussian_test_function, h1_norm, observables_f, replacement_integral, replacement_sum, resolvent_pairing,
    s_half_norm, variance_kernel_f2211, variance_kernel_f22, ResolventConfig, SourceKernel,
};
use akpz::lattice::{coupling_of, LatticeSpec, Momentum};
use akpz::recursions::{build_g_table, build_gplus_table, predicted_resolvent_pairing, GTable};
use akpz::sim::{estimate_dbulk, qv_statistics, NonlinearityMode, SimConfig};
use akpz::util::{binomial, derive_seed, mean_and_se};

use crate::config::*;
use crate::error::{invalid, CliError};
use crate::output::{Cell, Table};
use crate::selftest;

/// Runs an experiment; the second value lists failed checks (selftest only).
pub fn run(cfg: &ExperimentConfig) -> Result<(Table, Vec<String>), CliError> {
    let seed = cfg.common.seed;
    let table = match &cfg.experiment {
        Experiment::Dbulk(p) => dbulk(p, seed)?,
        Experiment::Resolvent(p) => resolvent(p)?,
        Experiment::Recursions(p) => recursions(p)?,
        Experiment::Replace(p) => replace(p)?,
        Experiment::Norms(p) => norms(p)?,
        Experiment::Qvvar(p) => qvvar(p, seed)?,
        Experiment::Wick(p) => wick(p, seed)?,
        Experiment::Selftest(p) => return selftest::run(p, seed),
    };
    Ok((table, Vec::new()))
}

fn lattice(n: u32) -> Result<Arc<LatticeSpec>, CliError> {
    Ok(Arc::new(LatticeSpec::new(n)?))
}

fn dbulk(p: &DbulkParams, seed: u64) -> Result<Table, CliError> {
    let mut t = Table::new("dbulk");
    for &n in &p.cutoffs {
        let c = coupling_of(p.lambda_hat, n)?;
        let mut cfg = SimConfig::new(c);
        if let Some(dt) = p.dt {
            cfg.dt = dt;
        }
        cfg.horizon = p.horizon;
        cfg.replicas = p.replicas;
        cfg.seed = seed;
        cfg.record_times = p.record_times.clone();
        cfg.mode = match p.mode {
            SimMode::Transform => NonlinearityMode::Transform,
            SimMode::Direct => NonlinearityMode::Direct,
            SimMode::Both => NonlinearityMode::BothCheck,
        };
        for e in estimate_dbulk(&cfg)? {
            t.push(vec![
                n.into(),
                p.lambda_hat.into(),
                cfg.dt.into(),
                e.t.into(),
                e.estimate.into(),
                e.std_error.into(),
                e.replicas.into(),
                c.nu_eff.into(),
            ]);
        }
    }
    Ok(t)
}

fn resolvent(p: &ResolventParams) -> Result<Table, CliError> {
    let mut t = Table::new("resolvent");
    let cfg = ResolventConfig { mu: p.mu, tolerance: p.tolerance, max_iterations: p.max_iterations };
    for &n in &p.cutoffs {
        let c = coupling_of(p.lambda_hat, n)?;
        let g = GTable::for_coupling(&c, p.n + 1)?;
        let pairing = resolvent_pairing(p.n, &cfg, &c)?;
        let pred = predicted_resolvent_pairing(p.n, &c, p.mu, &g)?;
        t.push(vec![
            n.into(),
            p.n.into(),
            p.lambda_hat.into(),
            p.mu.into(),
            pairing.into(),
            pred.into(),
            (pairing - pred).abs().into(),
        ]);
    }
    Ok(t)
}

fn recursions(p: &RecursionsParams) -> Result<Table, CliError> {
    let mut t = Table::new("recursions");
    let g = build_g_table(p.j_max, p.x_max, p.grid_step)?;
    let samples = (p.x_max / p.sample_step + 1e-9).floor() as usize;
    for s in 0..=samples {
        let x = s as f64 * p.sample_step;
        for j in 2..=p.j_max {
            let v = g.g(j, x)?;
            let closed = match j {
                2 => Some(0.0),
                3 => Some(x),
                4 => Some(x.ln_1p()),
                _ => None,
            };
            t.push(vec![
                x.into(),
                j.into(),
                v.into(),
                g.residual(j, x)?.into(),
                closed.map_or(Cell::Empty, |c| (v - c).abs().into()),
            ]);
        }
    }
    Ok(t)
}

fn replace(p: &ReplaceParams) -> Result<Table, CliError> {
    let mut t = Table::new("replace");
    let ks: Vec<Momentum> = p.k.iter().map(|&[a, b]| Momentum::new(a, b)).collect();
    for &n in &p.cutoffs {
        let c = coupling_of(p.lambda_hat, n)?;
        let (sum, integral) = match p.handles {
            Handles::Unit => (
                replacement_sum(ks.len(), &c, p.mu, &ks, |_| 1.0, |_| 1.0)?,
                replacement_integral(&c, p.mu, &ks, |_| 1.0, |_| 1.0)?,
            ),
            Handles::Recursion => {
                let g = GTable::for_coupling(&c, p.m + p.i)?;
                // Upper index m = n' + 2 − j' with j' = i + 1.
                let gp = build_gplus_table(p.m + p.i - 1, p.i + 1, p.i, &g)?;
                let h = |y: f64| 1.0 + g.g(p.m + p.i, y).unwrap_or(f64::NAN);
                let hp = |y: f64| gp.eval(p.i, y).unwrap_or(f64::NAN);
                let sum = replacement_sum(ks.len(), &c, p.mu, &ks, h, hp)?;
                let integral = replacement_integral(&c, p.mu, &ks, h, hp)?;
                if !sum.is_finite() || !integral.is_finite() {
                    return invalid("recursion handles evaluated outside their tabulated range");
                }
                (sum, integral)
            }
        };
        let handles = match p.handles {
            Handles::Unit => "unit",
            Handles::Recursion => "recursion",
        };
        t.push(vec![
            n.into(),
            p.lambda_hat.into(),
            p.mu.into(),
            handles.into(),
            sum.into(),
            integral.into(),
            (sum - integral).abs().into(),
        ]);
    }
    Ok(t)
}

fn norms(p: &NormsParams) -> Result<Table, CliError> {
    let mut t = Table::new("norms");
    for &n in &p.cutoffs {
        let c = coupling_of(p.lambda_hat, n)?;
        let sp = lattice(n)?;
        let g = GTable::for_coupling(&c, p.n + 1)?;
        let h = observables_f(2, p.n, &c, &g, &SourceKernel::n0(sp.clone(), &c)?)?;
        let h2 = FockVector::single(h.component(2).expect("chaos-2 component").clone());
        let h2_norm = h1_norm(&h2).powi(2);
        let pred = 0.5 * build_gplus_table(p.n, 2, 1, &g)?.eval(1, c.profile(1.0)?)?;
        let psi = gaussian_test_function(&sp, p.width);
        let g1 = SourceKernel::g1(sp.clone(), &c, &psi)?;
        // The test-function branch lives on general storage and may exceed the size limit.
        let b_norm = match observables_f(1, p.n, &c, &g, &g1) {
            Ok(b) => Cell::Float(h1_norm(&b)),
            Err(akpz::Error::Unsupported(_)) => Cell::Empty,
            Err(e) => return Err(e.into()),
        };
        let w2 = p.width * p.width;
        let f2211 = variance_kernel_f2211(&c, &g, p.n, |k| (-(k.norm2() as f64) / (2.0 * w2)).exp().into())?;
        t.push(vec![
            n.into(),
            p.n.into(),
            p.lambda_hat.into(),
            h2_norm.into(),
            pred.into(),
            s_half_norm(&h).into(),
            b_norm,
            variance_kernel_f22(&c, &g, p.n)?.into(),
            f2211.into(),
        ]);
    }
    Ok(t)
}

fn qvvar(p: &QvvarParams, seed: u64) -> Result<Table, CliError> {
    let mut t = Table::new("qvvar");
    for &n in &p.cutoffs {
        let c = coupling_of(p.lambda_hat, n)?;
        let g = GTable::for_coupling(&c, p.n + 1)?;
        let f = observables_f(2, p.n, &c, &g, &SourceKernel::n0(lattice(n)?, &c)?)?;
        let mut cfg = SimConfig::new(c);
        cfg.dt = p.dt;
        cfg.horizon = p.horizon;
        cfg.replicas = p.replicas;
        cfg.seed = seed;
        cfg.record_times = vec![p.horizon];
        let qv = qv_statistics(&cfg, &f)?;
        t.push(vec![
            n.into(),
            p.n.into(),
            p.lambda_hat.into(),
            qv.mean_qv_rate.into(),
            qv.mean_qv_rate_se.into(),
            qv.predicted_rate.into(),
            qv.var_qv.into(),
            qv.var_qv_se.into(),
            variance_kernel_f22(&c, &g, p.n)?.into(),
        ]);
    }
    Ok(t)
}

fn wick(p: &WickParams, seed: u64) -> Result<Table, CliError> {
    let mut t = Table::new("wick");
    for n in 0..=p.max_order {
        for m in 0..=p.max_order {
            let formula: f64 = (0..=n.min(m)).map(|r| binomial(n, r) * binomial(m, r) * factorial(r)).sum();
            let count = enumerate_pairings(n, m).len();
            t.push(vec!["pairing_count".into(), n.into(), m.into(), count.into(), formula.into(), Cell::Empty]);
        }
    }
    let sp = lattice(p.cutoff)?;
    let mut f = FockVector::new(sp.clone());
    for n in 0..=p.isometry_order {
        let mut k = random_kernel(sp.clone(), n, Support::General, derive_seed(seed, n as u64))?;
        k.scale(1.0 / (factorial(n) * k.norm_sqr()).sqrt());
        f.set(k)?;
    }
    let xs: Vec<f64> = (0..p.samples as u64)
        .map(|s| Ok(evaluate_chaos(&f, &sample_noise(sp.clone(), derive_seed(seed ^ 0x5eed, s)))?.powi(2)))
        .collect::<Result<_, akpz::Error>>()?;
    let (mean, se) = mean_and_se(&xs);
    t.push(vec![
        "isometry".into(),
        p.isometry_order.into(),
        Cell::Empty,
        mean.into(),
        fock_inner(&f, &f)?.into(),
        se.into(),
    ]);
    Ok(t)
}
