//! CSV tables with documented columns and the JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Column name and description.
pub type Column = (&'static str, &'static str);

/// Output schema of every experiment.
pub fn columns(experiment: &str) -> &'static [Column] {
    match experiment {
        "dbulk" => &[
            ("N", "lattice cutoff"),
            ("lambda_hat", "coupling λ̂"),
            ("dt", "time step"),
            ("t", "record time"),
            ("d_bulk", "bulk diffusion estimate D(t) = 1 + E[Q(t)²]/t"),
            ("std_error", "jackknife standard error of d_bulk"),
            ("replicas", "number of replicas"),
            ("nu_eff", "large-cutoff diffusivity √(2λ̂²/π + 1), for reference"),
        ],
        "resolvent" => &[
            ("N", "lattice cutoff"),
            ("n", "truncation level"),
            ("lambda_hat", "coupling λ̂"),
            ("mu", "Laplace variable μ"),
            ("pairing", "⟨𝔫₀, h̃^{N,n}⟩ = 2⟨𝔫₀, (μ − L₀ + H_n)⁻¹𝔫₀⟩"),
            ("prediction", "diagonal approximation ½·G_{n+1}(L^N(μ+1))"),
            ("gap", "|pairing − prediction|"),
        ],
        "recursions" => &[
            ("x", "grid point"),
            ("j", "recursion index"),
            ("g", "G_j(x)"),
            ("fixed_point_gap", "|G_j(x) − (√(2x+1) − 1)|"),
            ("closed_form_error", "|G_j(x) − closed form| for j ≤ 4 (0, x, log(1+x)); empty otherwise"),
        ],
        "replace" => &[
            ("N", "lattice cutoff"),
            ("lambda_hat", "coupling λ̂"),
            ("mu", "Laplace variable μ"),
            ("handles", "unit or recursion"),
            ("sum", "lattice sum P^N(μ, k_{1:n})"),
            ("integral", "∫₀^{L^N(μ+½|k|²)} H⁺/H² dy"),
            ("gap", "|sum − integral|"),
        ],
        "norms" => &[
            ("N", "lattice cutoff"),
            ("n", "truncation level"),
            ("lambda_hat", "coupling λ̂"),
            ("h2_h1_norm_sq", "‖(−L₀)^{1/2}𝔥₂‖² of the chaos-2 component of 𝔥^{N,n}"),
            ("h2_prediction", "½·G⁺_1^n(L^N(1))"),
            ("h_s_half_norm", "‖𝒮^{1/2}𝔥^{N,n}‖"),
            ("b_h1_norm", "‖(−L₀)^{1/2}𝔟^{N,n}‖ for the Gaussian test function; empty when the kernel exceeds the storage limit"),
            ("f22_norm_sq", "‖(−L₀)^{−1/2}𝔉_{2,2;2,2}‖²"),
            ("f2211_norm_sq", "‖(−L₀)^{−1/2}𝔉_{2,2;1,1}‖²"),
        ],
        "qvvar" => &[
            ("N", "lattice cutoff"),
            ("n", "truncation level of the observable 𝔥^{N,n}"),
            ("lambda_hat", "coupling λ̂"),
            ("mean_qv_rate", "mean of ⟨M⟩_T/T over replicas"),
            ("mean_qv_rate_se", "standard error of mean_qv_rate"),
            ("predicted_rate", "2‖(−L₀)^{1/2}𝔥^{N,n}‖²"),
            ("var_qv", "sample variance of ⟨M⟩_T"),
            ("var_qv_se", "jackknife standard error of var_qv"),
            ("f22_norm_sq", "‖(−L₀)^{−1/2}𝔉_{2,2;2,2}‖² at the same cutoff"),
        ],
        "wick" => &[
            ("check", "pairing_count or isometry"),
            ("n", "first order (pairing_count) or top chaos order (isometry)"),
            ("m", "second order (pairing_count); empty for isometry"),
            ("value", "enumerated pairings, or Monte Carlo mean of F²"),
            ("reference", "Σ_r C(n,r)C(m,r)r!, or the Fock norm ‖F‖²"),
            ("std_error", "Monte Carlo standard error; empty for pairing_count"),
        ],
        "selftest" => &[
            ("check", "invariant name"),
            ("passed", "true or false"),
            ("value", "measured deviation"),
            ("threshold", "largest accepted deviation"),
        ],
        _ => &[],
    }
}

/// Help text listing the CSV columns of an experiment.
pub fn columns_help(experiment: &str) -> String {
    let cols = columns(experiment);
    let width = cols.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let mut s = String::from("CSV columns:\n");
    for (name, doc) in cols {
        s.push_str(&format!("  {name:<width$}  {doc}\n"));
    }
    s.push_str("\nA JSON sidecar next to the CSV records the full resolved configuration.");
    s
}

/// A CSV cell.
#[derive(Clone, Debug)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) if *x != 0.0 && x.is_finite() && (x.abs() < 1e-4 || x.abs() >= 1e15) => format!("{x:e}"),
            Cell::Float(x) => format!("{x}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

/// Rows of one experiment.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: &'static [Column],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(experiment: &str) -> Self {
        Table { columns: columns(experiment), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema");
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        w.write_record(self.columns.iter().map(|(n, _)| *n))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default CSV path of an experiment.
pub fn default_out(experiment: &str) -> PathBuf {
    PathBuf::from(format!("akpz_{experiment}.csv"))
}

/// Sidecar path: the CSV path with a `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

#[derive(Serialize)]
struct ColumnDoc {
    name: &'static str,
    description: &'static str,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: &'a str,
    status: &'a str,
    config: &'a Value,
    csv: String,
    rows: usize,
    columns: Vec<ColumnDoc>,
    runtime_seconds: f64,
    seed_splitting: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    failures: Option<&'a [String]>,
}

/// Writes the sidecar describing a finished run.
pub fn write_sidecar(
    csv: &Path,
    experiment: &str,
    status: &str,
    config: &Value,
    table: &Table,
    runtime_seconds: f64,
    failures: Option<&[String]>,
) -> Result<PathBuf, CliError> {
    let path = sidecar_path(csv);
    let doc = Sidecar {
        tool: "akpz",
        version: env!("CARGO_PKG_VERSION"),
        experiment,
        status,
        config,
        csv: csv.display().to_string(),
        rows: table.rows.len(),
        columns: table.columns.iter().map(|&(name, description)| ColumnDoc { name, description }).collect(),
        runtime_seconds,
        seed_splitting: "replica r uses splitmix64(seed XOR splitmix64(r))",
        failures,
    };
    let text = serde_json::to_string_pretty(&doc).expect("sidecar serializes");
    fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
