//! Exponential-Euler integrator for the Fourier-mode SDE system.
//!
//! `dû(k) = (−½|k|²û(k) + λ_N M_k) dt + |k| dB(k)` for `1 ≤ |k| ≤ N` and
//! `dĥ(0) = λ_N N₀ dt + dB(0)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{config, domain, Error, Result};
use crate::fock::ModeStreams;
use crate::lattice::{Coupling, LatticeSpec};
use crate::sim::nonlin::{nonlinearity_direct, Nonlinearity, TransformWorkspace};
use crate::sim::state::SpectralState;
use crate::util::derive_seed;

/// How the nonlinearity is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearityMode {
    Direct,
    Transform,
    /// Evaluate both and fail if they disagree beyond `1e−8` relative.
    BothCheck,
}

/// Monte Carlo run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub coupling: Coupling,
    pub dt: f64,
    pub horizon: f64,
    pub replicas: usize,
    pub seed: u64,
    pub mode: NonlinearityMode,
    /// Times at which estimators report; each must lie on the step grid.
    pub record_times: Vec<f64>,
}

impl SimConfig {
    /// Defaults: `dt = min(1e−3, 0.1/N²)`, `T = 1`, 200 replicas, transform nonlinearity.
    pub fn new(coupling: Coupling) -> Self {
        let n = coupling.cutoff as f64;
        SimConfig {
            coupling,
            dt: 1e-3f64.min(0.1 / (n * n)),
            horizon: 1.0,
            replicas: 200,
            seed: 0,
            mode: NonlinearityMode::Transform,
            record_times: vec![1.0],
        }
    }

    /// Number of steps to reach the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return domain("dt and horizon must be positive");
        }
        if self.replicas == 0 {
            return domain("need at least one replica");
        }
        let steps = self.horizon / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return config("horizon must be an integer multiple of dt");
        }
        self.record_steps().map(|_| ())
    }

    /// Step indices of the record times.
    pub fn record_steps(&self) -> Result<Vec<usize>> {
        self.record_times
            .iter()
            .map(|&t| {
                let s = t / self.dt;
                if !(t >= 0.0) || t > self.horizon * (1.0 + 1e-12) || (s - s.round()).abs() > 1e-6 * s.max(1.0) {
                    return config(format!("record time {t} is not on the step grid in [0, T]"));
                }
                Ok(s.round() as usize)
            })
            .collect()
    }
}

/// Brownian increments over one step: `Var(Re) = Var(Im) = dt/2` per mode, `Var = dt` at zero.
#[derive(Clone, Debug)]
pub struct NoiseIncrement {
    pub modes: Vec<Complex64>,
    pub zero: f64,
}

/// Per-lattice integrator with precomputed propagators and a nonlinearity workspace.
#[derive(Clone)]
pub struct Integrator {
    spec: Arc<LatticeSpec>,
    cfg: SimConfig,
    decay: Vec<f64>,
    phi_dt: Vec<f64>,
    noise_scale: Vec<f64>,
    workspace: Option<TransformWorkspace>,
}

impl Integrator {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let spec = Arc::new(LatticeSpec::new(cfg.coupling.cutoff)?);
        let dt = cfg.dt;
        let a: Vec<f64> = (0..spec.len()).map(|i| 0.5 * spec.norm2(i)).collect();
        let decay = a.iter().map(|&a| (-a * dt).exp()).collect();
        // dt·φ₁(−a·dt) = (1 − e^{−a dt})/a.
        let phi_dt = a.iter().map(|&a| -(-a * dt).exp_m1() / a).collect();
        // Rescales a Brownian increment of variance dt to the exact OU variance 1 − e^{−|k|²dt}.
        let noise_scale = a.iter().map(|&a| (-(-2.0 * a * dt).exp_m1() / dt).sqrt()).collect();
        let workspace = match cfg.mode {
            NonlinearityMode::Direct => None,
            _ => Some(TransformWorkspace::with_default_grid(spec.clone())?),
        };
        Ok(Integrator { spec, cfg: cfg.clone(), decay, phi_dt, noise_scale, workspace })
    }

    pub fn spec(&self) -> &Arc<LatticeSpec> {
        &self.spec
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Nonlinearity of `state` in the configured mode.
    pub fn nonlinearity(&mut self, state: &SpectralState) -> Result<Nonlinearity> {
        match self.cfg.mode {
            NonlinearityMode::Direct => Ok(nonlinearity_direct(state, &self.cfg.coupling)),
            NonlinearityMode::Transform => Ok(self.workspace.as_mut().expect("planned").evaluate(state)),
            NonlinearityMode::BothCheck => {
                let t = self.workspace.as_mut().expect("planned").evaluate(state);
                let d = nonlinearity_direct(state, &self.cfg.coupling);
                let scale = d.modes.iter().map(|z| z.norm()).fold(d.zero_mode.abs(), f64::max).max(1e-300);
                let diff = d
                    .modes
                    .iter()
                    .zip(&t.modes)
                    .map(|(a, b)| (a - b).norm())
                    .fold((d.zero_mode - t.zero_mode).abs(), f64::max);
                if diff > 1e-8 * scale {
                    return Err(Error::Integration {
                        time: state.time,
                        detail: format!("direct and transform nonlinearities differ by {diff:.3e} (scale {scale:.3e})"),
                    });
                }
                Ok(d)
            }
        }
    }

    /// One exponential-Euler step from `state`, given its nonlinearity and a Brownian increment.
    pub fn advance(&self, state: &mut SpectralState, nl: &Nonlinearity, noise: &NoiseIncrement) -> Result<()> {
        let lam = self.cfg.coupling.lambda_n;
        let spec = &self.spec;
        let mut finite = true;
        for &k in spec.half_lattice() {
            let v = self.decay[k] * state.u_hat[k]
                + self.phi_dt[k] * lam * nl.modes[k]
                + self.noise_scale[k] * noise.modes[k];
            finite &= v.re.is_finite() && v.im.is_finite();
            state.u_hat[k] = v;
            state.u_hat[spec.neg(k)] = v.conj();
        }
        state.h_zero += lam * nl.zero_mode * self.cfg.dt + noise.zero;
        state.time += self.cfg.dt;
        if !finite || !state.h_zero.is_finite() {
            return Err(Error::Integration {
                time: state.time,
                detail: format!("non-finite mode after step (dt = {}, N = {})", self.cfg.dt, spec.cutoff()),
            });
        }
        Ok(())
    }

    /// Runs replica `r` from a stationary draw, calling `observe(step, state, nonlinearity)`
    /// at every grid time `0, dt, …, T`.
    pub fn run_path<F>(&mut self, replica: u64, mut observe: F) -> Result<()>
    where
        F: FnMut(usize, &SpectralState, &Nonlinearity),
    {
        let seed = derive_seed(self.cfg.seed, replica);
        let mut streams = ModeStreams::new(self.spec.clone(), seed);
        let mut state = SpectralState::zeros(self.spec.clone());
        streams.fill_complex(&mut state.u_hat, |_| 1.0);
        let dt = self.cfg.dt;
        let mut noise = NoiseIncrement { modes: vec![Complex64::new(0.0, 0.0); self.spec.len()], zero: 0.0 };
        for i in 0..self.cfg.steps() {
            let nl = self.nonlinearity(&state)?;
            observe(i, &state, &nl);
            streams.fill_complex(&mut noise.modes, |_| dt);
            noise.zero = dt.sqrt() * streams.zero_mode();
            self.advance(&mut state, &nl, &noise)?;
        }
        let nl = self.nonlinearity(&state)?;
        observe(self.cfg.steps(), &state, &nl);
        Ok(())
    }
}

/// Single step with a fresh integrator; see [`Integrator::advance`].
pub fn step(state: &SpectralState, cfg: &SimConfig, noise: &NoiseIncrement) -> Result<SpectralState> {
    let mut integ = Integrator::new(cfg)?;
    if *integ.spec != *state.spec {
        return config("state and configuration use different cutoffs");
    }
    let nl = integ.nonlinearity(state)?;
    let mut next = state.clone();
    integ.advance(&mut next, &nl, noise)?;
    Ok(next)
}

/// Runs `f(integrator, replica)` for every replica in parallel; results in replica order.
pub fn run_replicas<T, F>(cfg: &SimConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut Integrator, u64) -> Result<T> + Sync,
{
    let proto = Integrator::new(cfg)?;
    (0..cfg.replicas as u64)
        .into_par_iter()
        .map_init(|| proto.clone(), |integ, r| f(integ, r))
        .collect()
}
