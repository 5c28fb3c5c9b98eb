//! Command-line pipelines: a declarative run configuration, per-subcommand
//! execution, and deterministic CSV/JSON rendering of the results.
//!
//! Norm-scale quantities are emitted as natural logarithms only; raw norms
//! overflow binary floats for modest lambda. CSV floats use 17 significant
//! digits so downstream diffs are bit-stable.

use std::fmt;
use std::fs;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::applications::{
    damped_wave_curve, schrodinger_imag_axis_curve, schrodinger_real_axis_curve,
    weyl_domain_half_length, weyl_fit, DampedWaveKind, LevelCurve,
};
use crate::potential::{Potential, PotentialError};
use crate::resolvent::{estimate, PowerIterationConfig, ResolventError};
use crate::semigroup::{norm_maximizer, semigroup_norm};
use crate::spectral::{laplace_integral, laplace_log_asymptote, profile, Side, SpectralError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Validate,
    Profile,
    Resolvent,
    Semigroup,
    Levelcurve,
    Weyl,
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub points_per_rho: usize,
    pub schur_grid_n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points_per_rho: 20,
            schur_grid_n: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    SchrodingerReal,
    SchrodingerImag,
    DwLog,
    DwPow2n,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct WeylConfig {
    pub p: f64,
    pub grid_n: usize,
    /// Domain half-length; computed from the containment rule when absent.
    pub l: Option<f64>,
    pub k_max: usize,
}

impl Default for WeylConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            grid_n: 4000,
            l: None,
            k_max: 40,
        }
    }
}

fn default_output_path() -> String {
    "-".to_string()
}

fn default_laplace_m() -> f64 {
    2.0
}

fn default_x_max() -> f64 {
    1e3
}

fn default_validation_samples() -> usize {
    400
}

fn default_n_samples() -> usize {
    100
}

/// Full description of one run; `--config <path>` accepts this as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    #[serde(default)]
    pub potential: Option<String>,
    #[serde(default)]
    pub lambda_list: Option<Vec<f64>>,
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<(f64, f64)>,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default = "default_output_path")]
    pub output_path: String,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub require_numeric: bool,
    #[serde(default)]
    pub curve_kind: Option<CurveKind>,
    /// Family exponent of the level-curve formula (V_p, p, or n).
    #[serde(default)]
    pub curve_exponent: Option<f64>,
    #[serde(default = "default_laplace_m")]
    pub laplace_m: f64,
    #[serde(default)]
    pub weyl: WeylConfig,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_validation_samples")]
    pub validation_samples: usize,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            potential: None,
            lambda_list: None,
            t_list: None,
            range: None,
            n_samples: default_n_samples(),
            epsilon: None,
            output_format: OutputFormat::default(),
            output_path: default_output_path(),
            grid: GridConfig::default(),
            seed: 0,
            require_numeric: false,
            curve_kind: None,
            curve_exponent: None,
            laplace_m: default_laplace_m(),
            weyl: WeylConfig::default(),
            x_max: default_x_max(),
            validation_samples: default_validation_samples(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unrecognised potential spec: {0}")]
    BadPotentialSpec(String),
    #[error("{0}")]
    BelowLambdaZero(String),
    #[error("overflow guard tripped with --require-numeric: {0}")]
    GuardViolation(String),
    #[error("cannot write output to '{path}': {reason}")]
    UnwritableOutput { path: String, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    /// Stable machine-parsable error code for the one-line stderr report.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::BadPotentialSpec(_) => "bad_potential_spec",
            CliError::BelowLambdaZero(_) => "below_lambda0",
            CliError::GuardViolation(_) => "guard_violation",
            CliError::UnwritableOutput { .. } => "unwritable_output",
            CliError::InvalidConfig(_) => "bad_config",
            CliError::Compute(_) => "compute_failed",
        }
    }

    /// Single-line `code=... msg="..."` rendering for standard error.
    pub fn machine_line(&self) -> String {
        let msg = self.to_string().replace(['\n', '"'], " ");
        format!("error: code={} msg=\"{}\"", self.code(), msg)
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        CliError::BadPotentialSpec(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::BelowLambdaZero { .. } => CliError::BelowLambdaZero(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<ResolventError> for CliError {
    fn from(e: ResolventError) -> Self {
        match e {
            ResolventError::Spectral(s) => s.into(),
            other => CliError::Compute(other.to_string()),
        }
    }
}

/// One output cell; `Empty` renders as an empty CSV field / JSON null.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

/// Column-oriented result table with metadata header lines.
#[derive(Debug, Clone)]
pub struct OutputTable {
    pub subcommand: Subcommand,
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// 17-significant-digit decimal rendering; round-trips f64 bit-exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl OutputTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Float(x) => fmt17(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Text(s) => s.clone(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        use serde_json::{Map, Value};
        let mut root = Map::new();
        root.insert(
            "subcommand".into(),
            serde_json::to_value(self.subcommand).expect("enum"),
        );
        let mut meta = Map::new();
        for (k, v) in &self.metadata {
            meta.insert(k.clone(), Value::String(v.clone()));
        }
        root.insert("metadata".into(), Value::Object(meta));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Float(x) => serde_json::json!(x),
                        Cell::Int(i) => serde_json::json!(i),
                        Cell::Bool(b) => serde_json::json!(b),
                        Cell::Text(s) => serde_json::json!(s),
                        Cell::Empty => Value::Null,
                    };
                    obj.insert((*name).to_string(), v);
                }
                Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn parse_potential(config: &RunConfig) -> Result<Potential, CliError> {
    let spec = config
        .potential
        .as_deref()
        .ok_or_else(|| CliError::InvalidConfig("this subcommand needs --potential".into()))?;
    spec.parse::<Potential>().map_err(Into::into)
}

fn lambda_list(config: &RunConfig) -> Result<Vec<f64>, CliError> {
    config
        .lambda_list
        .clone()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| CliError::InvalidConfig("this subcommand needs --lambda".into()))
}

fn run_validate(config: &RunConfig) -> Result<OutputTable, CliError> {
    let pot = parse_potential(config)?;
    let report =
        crate::potential::validate_assumptions(&pot, config.x_max, config.validation_samples);
    let rows = report
        .checks
        .iter()
        .map(|c| {
            vec![
                Cell::Text(c.name.to_string()),
                Cell::Bool(c.passed),
                c.witness.map_or(Cell::Empty, |(x, _)| Cell::Float(x)),
                c.witness.map_or(Cell::Empty, |(_, v)| Cell::Float(v)),
            ]
        })
        .collect();
    Ok(OutputTable {
        subcommand: Subcommand::Validate,
        metadata: vec![
            ("potential".into(), pot.to_string()),
            ("coverage".into(), "sampled".into()),
            (
                "sampled_range".into(),
                format!(
                    "({},{}]",
                    fmt17(report.sampled_range.0),
                    fmt17(report.sampled_range.1)
                ),
            ),
            ("all_passed".into(), report.all_passed().to_string()),
        ],
        columns: vec!["check", "passed", "witness_x", "witness_value"],
        rows,
    })
}

fn run_profile(config: &RunConfig) -> Result<OutputTable, CliError> {
    let pot = parse_potential(config)?;
    let mut rows = Vec::new();
    for lam in lambda_list(config)? {
        let prof = profile(&pot, lam)?;
        rows.push(vec![
            Cell::Float(prof.lambda),
            Cell::Float(prof.x_lambda),
            Cell::Float(prof.f_at_xlambda),
            Cell::Float(prof.wprime_at_xlambda),
            Cell::Float(prof.x_lambda_0),
            Cell::Float(prof.delta_lambda),
            Cell::Float(prof.upsilon1),
            Cell::Float(prof.rho),
        ]);
    }
    Ok(OutputTable {
        subcommand: Subcommand::Profile,
        metadata: vec![("potential".into(), pot.to_string())],
        columns: vec![
            "lambda",
            "x_lambda",
            "f_at_xlambda",
            "wprime_at_xlambda",
            "x_lambda_0",
            "delta_lambda",
            "upsilon1",
            "rho",
        ],
        rows,
    })
}

fn run_resolvent(config: &RunConfig) -> Result<OutputTable, CliError> {
    let pot = parse_potential(config)?;
    let pi_cfg = PowerIterationConfig {
        seed: config.seed,
        ..PowerIterationConfig::default()
    };
    let mut rows = Vec::new();
    for lam in lambda_list(config)? {
        let prof = profile(&pot, lam)?;
        let est = estimate(
            &pot,
            lam,
            config.grid.points_per_rho,
            config.grid.schur_grid_n,
            &pi_cfg,
        )?;
        if config.require_numeric && est.log_numeric.is_none() {
            return Err(CliError::GuardViolation(format!(
                "2 f_lambda(x_lambda) = {:.3} exceeds the discretization guard at lambda = {lam}",
                2.0 * prof.f_at_xlambda
            )));
        }
        rows.push(vec![
            Cell::Float(lam),
            Cell::Float(prof.x_lambda),
            Cell::Float(prof.f_at_xlambda),
            Cell::Float(est.log_asymptotic),
            Cell::Float(est.log_schur_upper),
            Cell::Float(est.log_witness_lower),
            est.log_numeric.map_or(Cell::Empty, Cell::Float),
            if est.log_numeric.is_some() {
                Cell::Empty
            } else {
                Cell::Text("overflow".into())
            },
        ]);
    }
    Ok(OutputTable {
        subcommand: Subcommand::Resolvent,
        metadata: vec![
            ("potential".into(), pot.to_string()),
            ("seed".into(), config.seed.to_string()),
            (
                "points_per_rho".into(),
                config.grid.points_per_rho.to_string(),
            ),
            ("schur_grid_n".into(), config.grid.schur_grid_n.to_string()),
        ],
        columns: vec![
            "lambda",
            "x_lambda",
            "f_at_xlambda",
            "log_asymptotic",
            "log_schur_upper",
            "log_witness_lower",
            "log_numeric",
            "guard",
        ],
        rows,
    })
}

fn run_semigroup(config: &RunConfig) -> Result<OutputTable, CliError> {
    let pot = parse_potential(config)?;
    let ts = config
        .t_list
        .clone()
        .filter(|t| !t.is_empty())
        .ok_or_else(|| CliError::InvalidConfig("semigroup needs --t".into()))?;
    let mut rows = Vec::new();
    for t in ts {
        let log_norm = semigroup_norm(&pot, t).map_err(|e| CliError::Compute(e.to_string()))?;
        let maximizer = if t > 0.0 {
            norm_maximizer(&pot, t, 2001)
        } else {
            0.0
        };
        rows.push(vec![
            Cell::Float(t),
            Cell::Float(log_norm),
            Cell::Float(maximizer),
        ]);
    }
    Ok(OutputTable {
        subcommand: Subcommand::Semigroup,
        metadata: vec![("potential".into(), pot.to_string())],
        columns: vec!["t", "log_norm", "maximizer"],
        rows,
    })
}

fn run_levelcurve(config: &RunConfig) -> Result<OutputTable, CliError> {
    let kind = config
        .curve_kind
        .ok_or_else(|| CliError::InvalidConfig("levelcurve needs --kind".into()))?;
    let epsilon = config
        .epsilon
        .ok_or_else(|| CliError::InvalidConfig("levelcurve needs --epsilon".into()))?;
    let range = config
        .range
        .ok_or_else(|| CliError::InvalidConfig("levelcurve needs --range lo:hi".into()))?;
    let n = config.n_samples;
    let exponent = |what: &str| {
        config
            .curve_exponent
            .ok_or_else(|| CliError::InvalidConfig(format!("levelcurve {what} needs --exponent")))
    };
    let curve: LevelCurve = match kind {
        CurveKind::SchrodingerReal => {
            schrodinger_real_axis_curve(exponent("schrodinger-real")?, epsilon, range, n)
        }
        CurveKind::SchrodingerImag => {
            let pot = parse_potential(config)?;
            schrodinger_imag_axis_curve(&pot, epsilon, range, n)
        }
        CurveKind::DwLog => damped_wave_curve(
            DampedWaveKind::Log {
                p: exponent("dw-log")?,
            },
            epsilon,
            range,
            n,
        ),
        CurveKind::DwPow2n => damped_wave_curve(
            DampedWaveKind::Pow2n {
                n: exponent("dw-pow2n")? as u32,
            },
            epsilon,
            range,
            n,
        ),
    }
    .map_err(|e| CliError::Compute(e.to_string()))?;

    let mut metadata = vec![
        ("kind".into(), curve.kind.as_str().to_string()),
        ("epsilon".into(), fmt17(curve.epsilon)),
        ("leading_order".into(), curve.leading_order.to_string()),
        ("conjectured".into(), curve.conjectured.to_string()),
    ];
    if let Some(note) = curve.note {
        metadata.push(("note".into(), note.to_string()));
    }
    // the Davies specialization is emitted alongside the generic V_p = 2 curve
    let davies = kind == CurveKind::SchrodingerReal && config.curve_exponent == Some(2.0);
    let columns = if davies {
        vec!["parameter", "value", "davies"]
    } else {
        vec!["parameter", "value"]
    };
    let rows = curve
        .samples
        .iter()
        .map(|&(a, v)| {
            let mut row = vec![Cell::Float(a), Cell::Float(v)];
            if davies {
                row.push(Cell::Float(crate::applications::davies_real_axis_b(
                    epsilon, a,
                )));
            }
            row
        })
        .collect();
    Ok(OutputTable {
        subcommand: Subcommand::Levelcurve,
        metadata,
        columns,
        rows,
    })
}

fn run_laplace(config: &RunConfig) -> Result<OutputTable, CliError> {
    let pot = parse_potential(config)?;
    let m = config.laplace_m;
    let mut rows = Vec::new();
    for lam in lambda_list(config)? {
        let prof = profile(&pot, lam)?;
        let log_iplus = laplace_integral(&pot, lam, m, Side::Plus)?;
        let log_asym = laplace_log_asymptote(&prof, m);
        rows.push(vec![
            Cell::Float(lam),
            Cell::Float(m),
            Cell::Float(log_iplus),
            Cell::Float(log_asym),
            Cell::Float((log_iplus - log_asym).exp()),
        ]);
    }
    Ok(OutputTable {
        subcommand: Subcommand::Laplace,
        metadata: vec![("potential".into(), pot.to_string())],
        columns: vec!["lambda", "M", "log_Iplus", "log_asymptote", "ratio"],
        rows,
    })
}

fn run_weyl(config: &RunConfig) -> Result<OutputTable, CliError> {
    let w = &config.weyl;
    let l = w
        .l
        .unwrap_or_else(|| weyl_domain_half_length(w.p, w.k_max));
    let fit =
        weyl_fit(w.p, w.grid_n, l, w.k_max).map_err(|e| CliError::Compute(e.to_string()))?;
    let rows = fit
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &mu)| vec![Cell::Int(i as i64 + 1), Cell::Float(mu)])
        .collect();
    Ok(OutputTable {
        subcommand: Subcommand::Weyl,
        metadata: vec![
            ("p".into(), fmt17(fit.p)),
            ("grid_n".into(), w.grid_n.to_string()),
            ("l".into(), fmt17(l)),
            ("k_max".into(), w.k_max.to_string()),
            ("fitted_slope".into(), fmt17(fit.fitted_slope)),
            ("expected_slope".into(), fmt17(fit.expected_slope)),
        ],
        columns: vec!["k", "mu_k"],
        rows,
    })
}

/// Execute the pipeline for `config` and return the rendered table.
pub fn render(config: &RunConfig) -> Result<String, CliError> {
    let table = match config.subcommand {
        Subcommand::Validate => run_validate(config)?,
        Subcommand::Profile => run_profile(config)?,
        Subcommand::Resolvent => run_resolvent(config)?,
        Subcommand::Semigroup => run_semigroup(config)?,
        Subcommand::Levelcurve => run_levelcurve(config)?,
        Subcommand::Weyl => run_weyl(config)?,
        Subcommand::Laplace => run_laplace(config)?,
    };
    Ok(table.render(config.output_format))
}

/// Execute the pipeline and write to the configured output path
/// (`-` for standard output).
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let text = render(config)?;
    if config.output_path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::UnwritableOutput {
                path: "-".into(),
                reason: e.to_string(),
            })
    } else {
        fs::write(&config.output_path, text).map_err(|e| CliError::UnwritableOutput {
            path: config.output_path.clone(),
            reason: e.to_string(),
        })
    }
}

/// Load a [`RunConfig`] from a JSON file.
pub fn load_config(path: &str) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::InvalidConfig(format!("cannot read config '{path}': {e}"))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::InvalidConfig(format!("cannot parse config '{path}': {e}")))
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Subcommand::Validate => "validate",
            Subcommand::Profile => "profile",
            Subcommand::Resolvent => "resolvent",
            Subcommand::Semigroup => "semigroup",
            Subcommand::Levelcurve => "levelcurve",
            Subcommand::Weyl => "weyl",
            Subcommand::Laplace => "laplace",
        };
        f.write_str(s)
    }
}
