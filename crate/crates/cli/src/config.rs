//! Experiment configuration: typed parameter bundles and their resolution
//! from defaults, a flat JSON file and command-line flags (flags win).

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{invalid, CliError};

/// Names of the experiments, as used on the command line and in config files.
pub const EXPERIMENTS: [&str; 8] = ["dbulk", "resolvent", "recursions", "replace", "norms", "qvvar", "wick", "selftest"];

/// Settings shared by every experiment.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// CSV output path; the sidecar goes next to it with a `.json` extension.
    pub out: Option<PathBuf>,
    /// Master seed; replica `r` uses `splitmix64(seed ⊕ splitmix64(r))`.
    pub seed: u64,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
}

impl Default for Common {
    fn default() -> Self {
        Common { out: None, seed: 0, threads: 0 }
    }
}

/// Nonlinearity evaluation path of the simulator.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Transform,
    Direct,
    Both,
}

/// Handles `H`, `H⁺` of the replacement sum.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Handles {
    /// `H = H⁺ ≡ 1`.
    Unit,
    /// `H = 1 + G_{m+i}`, `H⁺ = G⁺_i^m`.
    Recursion,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DbulkParams {
    #[serde(rename = "N")]
    pub cutoffs: Vec<u32>,
    pub lambda_hat: f64,
    /// Time step; `null` selects `min(1e−3, 0.1/N²)` per cutoff.
    pub dt: Option<f64>,
    pub horizon: f64,
    pub replicas: usize,
    pub record_times: Vec<f64>,
    pub mode: SimMode,
}

impl Default for DbulkParams {
    fn default() -> Self {
        DbulkParams {
            cutoffs: vec![8],
            lambda_hat: 1.0,
            dt: None,
            horizon: 1.0,
            replicas: 200,
            record_times: vec![0.25, 0.5, 0.75, 1.0],
            mode: SimMode::Transform,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventParams {
    #[serde(rename = "N")]
    pub cutoffs: Vec<u32>,
    pub lambda_hat: f64,
    pub mu: f64,
    pub n: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ResolventParams {
    fn default() -> Self {
        ResolventParams { cutoffs: vec![4, 8, 16], lambda_hat: 1.0, mu: 1.0, n: 2, tolerance: 1e-8, max_iterations: 500 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RecursionsParams {
    pub j_max: usize,
    pub x_max: f64,
    pub grid_step: f64,
    /// Spacing of the output rows in `x`.
    pub sample_step: f64,
}

impl Default for RecursionsParams {
    fn default() -> Self {
        RecursionsParams { j_max: 64, x_max: 4.5, grid_step: 1e-4, sample_step: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ReplaceParams {
    #[serde(rename = "N")]
    pub cutoffs: Vec<u32>,
    pub lambda_hat: f64,
    pub mu: f64,
    /// Momenta `k_{1:n}` as `[k1, k2]` pairs.
    pub k: Vec<[i32; 2]>,
    pub handles: Handles,
    /// Upper index `m` of the recursion handles.
    pub m: usize,
    /// Lower index `i` of the recursion handles.
    pub i: usize,
}

impl Default for ReplaceParams {
    fn default() -> Self {
        ReplaceParams {
            cutoffs: vec![64, 256, 1024],
            lambda_hat: 1.0,
            mu: 0.0,
            k: vec![[1, 0]],
            handles: Handles::Unit,
            m: 3,
            i: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NormsParams {
    #[serde(rename = "N")]
    pub cutoffs: Vec<u32>,
    pub lambda_hat: f64,
    pub n: usize,
    /// Width `w` of the test function `ψ̂(k) = exp(−|k|²/(2w²))`.
    pub width: f64,
}

impl Default for NormsParams {
    fn default() -> Self {
        NormsParams { cutoffs: vec![8, 16, 32], lambda_hat: 1.0, n: 3, width: 2.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct QvvarParams {
    #[serde(rename = "N")]
    pub cutoffs: Vec<u32>,
    pub lambda_hat: f64,
    pub n: usize,
    pub dt: f64,
    pub horizon: f64,
    pub replicas: usize,
}

impl Default for QvvarParams {
    fn default() -> Self {
        QvvarParams { cutoffs: vec![8, 16, 32], lambda_hat: 1.0, n: 2, dt: 1e-3, horizon: 1.0, replicas: 300 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct WickParams {
    #[serde(rename = "N")]
    pub cutoff: u32,
    /// Largest order `n, m` in the pairing-count table.
    pub max_order: usize,
    /// Top chaos order of the random vector in the isometry check.
    pub isometry_order: usize,
    pub samples: usize,
}

impl Default for WickParams {
    fn default() -> Self {
        WickParams { cutoff: 4, max_order: 4, isometry_order: 3, samples: 10_000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestParams {
    /// Replicas of the stationarity smoke test.
    pub replicas: usize,
    /// Breaks the permutation symmetry of the adjointness inputs (negative control).
    pub corrupt_symmetry: bool,
}

impl Default for SelftestParams {
    fn default() -> Self {
        SelftestParams { replicas: 64, corrupt_symmetry: false }
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Dbulk(DbulkParams),
    Resolvent(ResolventParams),
    Recursions(RecursionsParams),
    Replace(ReplaceParams),
    Norms(NormsParams),
    Qvvar(QvvarParams),
    Wick(WickParams),
    Selftest(SelftestParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Dbulk(_) => "dbulk",
            Experiment::Resolvent(_) => "resolvent",
            Experiment::Recursions(_) => "recursions",
            Experiment::Replace(_) => "replace",
            Experiment::Norms(_) => "norms",
            Experiment::Qvvar(_) => "qvvar",
            Experiment::Wick(_) => "wick",
            Experiment::Selftest(_) => "selftest",
        }
    }

    fn params_value(&self) -> Value {
        let v = match self {
            Experiment::Dbulk(p) => serde_json::to_value(p),
            Experiment::Resolvent(p) => serde_json::to_value(p),
            Experiment::Recursions(p) => serde_json::to_value(p),
            Experiment::Replace(p) => serde_json::to_value(p),
            Experiment::Norms(p) => serde_json::to_value(p),
            Experiment::Qvvar(p) => serde_json::to_value(p),
            Experiment::Wick(p) => serde_json::to_value(p),
            Experiment::Selftest(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }

    /// Checks every parameter against the preconditions of the library calls.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Experiment::Dbulk(p) => {
                check_cutoffs(&p.cutoffs, 2)?;
                check_lambda(p.lambda_hat)?;
                if let Some(dt) = p.dt {
                    positive("dt", dt)?;
                }
                positive("horizon", p.horizon)?;
                at_least("replicas", p.replicas, 2)?;
                if p.record_times.is_empty() || p.record_times.iter().any(|&t| !(t > 0.0 && t <= p.horizon)) {
                    return invalid("record_times must be nonempty and lie in (0, horizon]");
                }
            }
            Experiment::Resolvent(p) => {
                check_cutoffs(&p.cutoffs, 2)?;
                check_lambda(p.lambda_hat)?;
                positive("mu", p.mu)?;
                at_least("n", p.n, 2)?;
                positive("tolerance", p.tolerance)?;
                at_least("max_iterations", p.max_iterations, 1)?;
            }
            Experiment::Recursions(p) => {
                at_least("j_max", p.j_max, 4)?;
                positive("x_max", p.x_max)?;
                positive("grid_step", p.grid_step)?;
                positive("sample_step", p.sample_step)?;
                if p.grid_step > p.x_max {
                    return invalid("grid_step must not exceed x_max");
                }
            }
            Experiment::Replace(p) => {
                check_cutoffs(&p.cutoffs, 2)?;
                check_lambda(p.lambda_hat)?;
                if !(p.mu >= 0.0) || !p.mu.is_finite() {
                    return invalid("mu must be finite and nonnegative");
                }
                if p.k.is_empty() || p.k.iter().any(|k| k == &[0, 0]) {
                    return invalid("k must list at least one nonzero momentum");
                }
                if p.handles == Handles::Recursion {
                    at_least("m", p.m, 2)?;
                    at_least("i", p.i, 1)?;
                }
            }
            Experiment::Norms(p) => {
                check_cutoffs(&p.cutoffs, 2)?;
                check_lambda(p.lambda_hat)?;
                at_least("n", p.n, 2)?;
                positive("width", p.width)?;
            }
            Experiment::Qvvar(p) => {
                check_cutoffs(&p.cutoffs, 2)?;
                check_lambda(p.lambda_hat)?;
                at_least("n", p.n, 2)?;
                if p.n > akpz::sim::MAX_PATH_ORDER {
                    return invalid(format!("n must be at most {}", akpz::sim::MAX_PATH_ORDER));
                }
                positive("dt", p.dt)?;
                positive("horizon", p.horizon)?;
                at_least("replicas", p.replicas, 3)?;
            }
            Experiment::Wick(p) => {
                check_cutoffs(&[p.cutoff], 1)?;
                if p.max_order > 8 {
                    return invalid("max_order must be at most 8");
                }
                if p.isometry_order > akpz::fock::MAX_EVAL_ORDER {
                    return invalid(format!("isometry_order must be at most {}", akpz::fock::MAX_EVAL_ORDER));
                }
                at_least("samples", p.samples, 2)?;
            }
            Experiment::Selftest(p) => at_least("replicas", p.replicas, 2)?,
        }
        Ok(())
    }
}

fn check_cutoffs(cutoffs: &[u32], min: u32) -> Result<(), CliError> {
    if cutoffs.is_empty() {
        return invalid("N must list at least one cutoff");
    }
    if let Some(n) = cutoffs.iter().find(|&&n| n < min) {
        return invalid(format!("cutoff N = {n} is below {min}"));
    }
    Ok(())
}

fn check_lambda(l: f64) -> Result<(), CliError> {
    if !(l >= 0.0) || !l.is_finite() {
        return invalid(format!("lambda_hat must be finite and nonnegative, got {l}"));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("{name} must be positive and finite, got {x}"));
    }
    Ok(())
}

fn at_least(name: &str, x: usize, min: usize) -> Result<(), CliError> {
    if x < min {
        return invalid(format!("{name} must be at least {min}, got {x}"));
    }
    Ok(())
}

/// Experiment plus shared settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub common: Common,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    /// Flat JSON object holding every resolved setting; loadable as a config file.
    pub fn to_flat_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("experiment".into(), Value::String(self.experiment.name().into()));
        if let Value::Object(c) = serde_json::to_value(&self.common).expect("serializes") {
            map.extend(c);
        }
        if let Value::Object(p) = self.experiment.params_value() {
            map.extend(p);
        }
        Value::Object(map)
    }
}

/// Reads a flat JSON config file.
pub fn load_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => invalid(format!("{}: config must be a JSON object", path.display())),
        Err(e) => invalid(format!("{}: {e}", path.display())),
    }
}

/// The `experiment` key of a config file, if any.
pub fn file_experiment(file: &Map<String, Value>) -> Result<Option<String>, CliError> {
    match file.get("experiment") {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => invalid(format!("experiment must be a string, got {other}")),
    }
}

fn overlay(base: &mut Value, top: Value) {
    if let (Value::Object(b), Value::Object(t)) = (base, top) {
        for (k, v) in t {
            b.insert(k, v);
        }
    }
}

fn resolve_part<P>(file: &Map<String, Value>, keys: &[&str], flags: Value) -> Result<P, CliError>
where
    P: Serialize + DeserializeOwned + Default,
{
    let mut v = serde_json::to_value(P::default()).expect("defaults serialize");
    let from_file: Map<String, Value> = file.iter().filter(|(k, _)| keys.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
    overlay(&mut v, Value::Object(from_file));
    overlay(&mut v, flags);
    serde_json::from_value(v).map_err(|e| CliError::InvalidParameter(e.to_string()))
}

const COMMON_KEYS: [&str; 3] = ["out", "seed", "threads"];

/// Resolves defaults, then the file, then the flags, into an experiment of the given name.
pub fn resolve(
    name: &str,
    file: &Map<String, Value>,
    common_flags: Value,
    param_flags: Value,
) -> Result<ExperimentConfig, CliError> {
    if let Some(declared) = file_experiment(file)? {
        if !EXPERIMENTS.contains(&declared.as_str()) {
            return Err(CliError::UnknownExperiment(declared));
        }
        if declared != name {
            return invalid(format!("config file is for experiment '{declared}', not '{name}'"));
        }
    }
    let common: Common = resolve_part(file, &COMMON_KEYS, common_flags)?;
    let param_keys: Vec<&str> =
        file.keys().map(|k| k.as_str()).filter(|k| !COMMON_KEYS.contains(k) && *k != "experiment").collect();
    let experiment = match name {
        "dbulk" => Experiment::Dbulk(resolve_part(file, &param_keys, param_flags)?),
        "resolvent" => Experiment::Resolvent(resolve_part(file, &param_keys, param_flags)?),
        "recursions" => Experiment::Recursions(resolve_part(file, &param_keys, param_flags)?),
        "replace" => Experiment::Replace(resolve_part(file, &param_keys, param_flags)?),
        "norms" => Experiment::Norms(resolve_part(file, &param_keys, param_flags)?),
        "qvvar" => Experiment::Qvvar(resolve_part(file, &param_keys, param_flags)?),
        "wick" => Experiment::Wick(resolve_part(file, &param_keys, param_flags)?),
        "selftest" => Experiment::Selftest(resolve_part(file, &param_keys, param_flags)?),
        other => return Err(CliError::UnknownExperiment(other.into())),
    };
    let cfg = ExperimentConfig { common, experiment };
    cfg.experiment.validate()?;
    Ok(cfg)
}
