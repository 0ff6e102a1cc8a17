//! Replica estimators along the stationary flow.

use num_complex::Complex64;

use crate::error::{config, domain, Error, Result};
use crate::fock::{energy_density, evaluate_kernel, FockVector};
use crate::generator::{h1_norm, hminus1_norm};
use crate::sim::integrator::{run_replicas, SimConfig};
use crate::util::{jackknife, mean_and_se, sample_variance};

/// Highest chaos order accepted by the path observables.
pub const MAX_PATH_ORDER: usize = 3;

/// `D(t) = 1 + E[Q(t)²]/t` at one record time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbulkEstimate {
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub replicas: usize,
}

/// Per-replica `Q(t) = ∫₀ᵗ λ_N N₀[u_s] ds` at the record times, trapezoid on the step grid.
///
/// Row `r` belongs to replica `r`; column `i` to `cfg.record_times[i]`.
pub fn zero_mode_integrals(cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    let records = cfg.record_steps()?;
    let lam = cfg.coupling.lambda_n;
    let dt = cfg.dt;
    run_replicas(cfg, |integ, r| {
        let mut q = 0.0;
        let mut prev = 0.0;
        let mut out = vec![0.0; records.len()];
        integ.run_path(r, |i, _, nl| {
            let cur = lam * nl.zero_mode;
            if i > 0 {
                q += 0.5 * dt * (prev + cur);
            }
            prev = cur;
            for (slot, &s) in out.iter_mut().zip(&records) {
                if s == i {
                    *slot = q;
                }
            }
        })?;
        Ok(out)
    })
}

/// Bulk-diffusion estimate at every positive record time, with jackknife errors.
pub fn estimate_dbulk(cfg: &SimConfig) -> Result<Vec<DbulkEstimate>> {
    if cfg.replicas < 2 {
        return domain("the bulk-diffusion estimator needs at least two replicas");
    }
    let q = zero_mode_integrals(cfg)?;
    Ok(cfg
        .record_times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(i, &t)| {
            let sq: Vec<f64> = q.iter().map(|row| row[i] * row[i]).collect();
            let (estimate, std_error) =
                jackknife(&sq, |s| 1.0 + s.iter().sum::<f64>() / (s.len() as f64 * t));
            DbulkEstimate { t, estimate, std_error, replicas: cfg.replicas }
        })
        .collect())
}

/// Mean and standard error of `|û_t(k)|²` over replicas for one mode and time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModalMoment {
    pub t: f64,
    pub mode: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// `E|û_t(k)|²` for the given mode indices at every record time.
pub fn modal_second_moments(cfg: &SimConfig, modes: &[usize]) -> Result<Vec<ModalMoment>> {
    let records = cfg.record_steps()?;
    let rows = run_replicas(cfg, |integ, r| {
        if let Some(&bad) = modes.iter().find(|&&m| m >= integ.spec().len()) {
            return config(format!("mode index {bad} outside the lattice"));
        }
        let mut out = vec![0.0; records.len() * modes.len()];
        integ.run_path(r, |i, state, _| {
            for (ti, &s) in records.iter().enumerate() {
                if s == i {
                    for (mi, &m) in modes.iter().enumerate() {
                        out[ti * modes.len() + mi] = state.u_hat[m].norm_sqr();
                    }
                }
            }
        })?;
        Ok(out)
    })?;
    let mut res = Vec::with_capacity(records.len() * modes.len());
    for (ti, &t) in cfg.record_times.iter().enumerate() {
        for (mi, &m) in modes.iter().enumerate() {
            let xs: Vec<f64> = rows.iter().map(|row| row[ti * modes.len() + mi]).collect();
            let (mean, std_error) = mean_and_se(&xs);
            res.push(ModalMoment { t, mode: m, mean, std_error });
        }
    }
    Ok(res)
}

fn check_orders(f: &FockVector, cfg: &SimConfig) -> Result<()> {
    if f.spec().cutoff() != cfg.coupling.cutoff {
        return config("observable and simulation use different cutoffs");
    }
    match f.max_order() {
        Some(n) if n > MAX_PATH_ORDER => Err(Error::Unsupported(format!(
            "path observables support chaos order ≤ {MAX_PATH_ORDER}, got {n}"
        ))),
        _ => Ok(()),
    }
}

/// Quadratic-variation statistics of the martingale attached to `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct QvStatistics {
    /// Replica mean of `⟨M⟩_T/T` with `⟨M⟩_T = ∫₀ᵀ Σ|k|²|D_k f(u_s)|² ds`.
    pub mean_qv_rate: f64,
    pub mean_qv_rate_se: f64,
    /// `2‖(−L₀)^{1/2} f‖²`.
    pub predicted_rate: f64,
    /// Sample variance of `⟨M⟩_T` across replicas.
    pub var_qv: f64,
    pub var_qv_se: f64,
    /// `⟨M⟩_T` per replica.
    pub integrals: Vec<f64>,
}

/// Runs the flow and integrates `Σ_k |k|²|D_k f(u_s)|²` over `[0, T]` on every replica.
pub fn qv_statistics(cfg: &SimConfig, f: &FockVector) -> Result<QvStatistics> {
    check_orders(f, cfg)?;
    let dt = cfg.dt;
    let integrals = run_replicas(cfg, |integ, r| {
        let mut acc = 0.0;
        let mut prev = 0.0;
        integ.run_path(r, |i, state, _| {
            let cur = energy_density(f, &state.u_hat);
            if i > 0 {
                acc += 0.5 * dt * (prev + cur);
            }
            prev = cur;
        })?;
        Ok(acc)
    })?;
    let rates: Vec<f64> = integrals.iter().map(|q| q / cfg.horizon).collect();
    let (mean_qv_rate, mean_qv_rate_se) = mean_and_se(&rates);
    let (var_qv, var_qv_se) = if integrals.len() >= 3 {
        jackknife(&integrals, sample_variance)
    } else {
        (f64::NAN, f64::NAN)
    };
    let h1 = h1_norm(f);
    Ok(QvStatistics {
        mean_qv_rate,
        mean_qv_rate_se,
        predicted_rate: 2.0 * h1 * h1,
        var_qv,
        var_qv_se,
        integrals,
    })
}

/// Path-maximum estimate of `E[sup_{t≤T} |∫₀ᵗ F(u_s) ds|²]^{1/2}` against `T^{1/2}‖(−L₀)^{−1/2}F‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ItoTrickReport {
    pub estimate: f64,
    pub std_error: f64,
    pub reference: f64,
    /// `estimate / reference`, zero when both vanish.
    pub ratio: f64,
    pub replicas: usize,
}

/// Itô-trick probe for a centred chaos observable `F`.
pub fn ito_trick_probe(cfg: &SimConfig, f: &FockVector) -> Result<ItoTrickReport> {
    check_orders(f, cfg)?;
    let dt = cfg.dt;
    let eval = |eta: &[Complex64]| f.iter().map(|k| evaluate_kernel(k, eta)).sum::<Complex64>().re;
    let sups = run_replicas(cfg, |integ, r| {
        let mut acc = 0.0f64;
        let mut prev = 0.0;
        let mut sup = 0.0f64;
        integ.run_path(r, |i, state, _| {
            let cur = eval(&state.u_hat);
            if i > 0 {
                acc += 0.5 * dt * (prev + cur);
                sup = sup.max(acc * acc);
            }
            prev = cur;
        })?;
        Ok(sup)
    })?;
    let (m2, m2_se) = mean_and_se(&sups);
    let estimate = m2.sqrt();
    let std_error = if estimate > 0.0 { m2_se / (2.0 * estimate) } else { 0.0 };
    let reference = cfg.horizon.sqrt() * hminus1_norm(f);
    let ratio = if estimate == 0.0 { 0.0 } else { estimate / reference };
    Ok(ItoTrickReport { estimate, std_error, reference, ratio, replicas: cfg.replicas })
}
