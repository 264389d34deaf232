//! Commands behind the `kapitza` binary.
//!
//! Every command evaluates a grid of independent `(A, B, mu)` points in parallel and
//! assembles the output in grid order, so reruns are byte-identical. Each output starts
//! with a metadata block: the configuration echo, library version, truncation orders and
//! oracle matrix sizes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::contour::Branch;
use crate::error::Error;
use crate::oracle::{self, default_truncation, Sector};
use crate::potential::{PendulumParams, Well};
use crate::series::{oscillatory_energy, GENERATED_ENERGY_TERMS, PRINTED_ENERGY_TERMS};
use crate::tunneling::{splitting_report, ActionChoice};
use crate::wavefn::{BarrierForm, BarrierWave, Kind, WellExpansion, WellOptions};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

/// Environment variable read by the binary for the default worker count.
pub const THREADS_ENV: &str = "KAPITZA_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("regime violation (--strict): {0}")]
    Strict(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Strict(_) => EXIT_STRICT,
        }
    }
}

#[derive(Parser, Debug, Clone)]
#[command(name = "kapitza", version, about = "Spectra of the quantum Kapitza pendulum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub args: GridArgs,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Band edges (periodic sector) or antiperiodic eigenvalues over the (A, B) grid.
    Chart,
    /// Series energies per truncation order against the oracle.
    Compare,
    /// Piecewise wavefunction dump with region tags.
    Wavefunction,
    /// Two-level tunneling report.
    Tunneling,
}

#[derive(clap::Args, Debug, Clone)]
pub struct GridArgs {
    /// A value or `range:start:stop:count`.
    #[arg(long = "A", global = true, default_value = "0")]
    pub a: String,
    /// A value or `range:start:stop:count`.
    #[arg(long = "B", global = true, default_value = "100")]
    pub b: String,
    /// Comma-separated state indices.
    #[arg(long, global = true, default_value = "0")]
    pub mu: String,
    /// Truncation order: band index for `chart`, kept series terms for `compare`,
    /// barrier/well order for `wavefunction`.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// `periodic`/`antiperiodic` for `chart`, `zero`/`pi` (well) otherwise.
    #[arg(long, global = true)]
    pub sector: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Treat regime advisories as errors (exit 4).
    #[arg(long, global = true)]
    pub strict: bool,
    /// Seed for randomized sweeps; echoed into the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorChoice {
    Periodic,
    Antiperiodic,
    Zero,
    Pi,
}

/// Validated configuration; serialized verbatim into every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub mu: Vec<u32>,
    pub order: usize,
    pub sector: SectorChoice,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub seed: u64,
}

/// Parse `v` or `range:start:stop:count` (inclusive, evenly spaced).
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Config(format!("grid `{text}`: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [v] => vec![v.trim().parse::<f64>().map_err(|_| bad("not a number"))?],
        ["range", start, stop, count] => {
            let s: f64 = start.parse().map_err(|_| bad("bad start"))?;
            let e: f64 = stop.parse().map_err(|_| bad("bad stop"))?;
            let n: usize = count.parse().map_err(|_| bad("bad count"))?;
            match n {
                0 => Vec::new(),
                1 => vec![s],
                _ => (0..n).map(|i| s + (e - s) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        _ => return Err(bad("expected a value or range:start:stop:count")),
    };
    if values.is_empty() {
        return Err(bad("empty grid"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite value"));
    }
    Ok(values)
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let g = &cli.args;
        let a = parse_grid(&g.a)?;
        let b = parse_grid(&g.b)?;
        if b.iter().any(|&x| x <= 0.0) {
            return Err(CliError::Config("B must be positive".into()));
        }
        let mu = g
            .mu
            .split(',')
            .map(|s| s.trim().parse::<u32>().map_err(|_| CliError::Config(format!("bad mu `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let sector = match (cli.command, g.sector.as_deref()) {
            (CommandKind::Chart, None | Some("periodic")) => SectorChoice::Periodic,
            (CommandKind::Chart, Some("antiperiodic")) => SectorChoice::Antiperiodic,
            (CommandKind::Chart, Some(s)) => return Err(CliError::Config(format!("chart sector `{s}`"))),
            (_, None | Some("zero")) => SectorChoice::Zero,
            (_, Some("pi")) => SectorChoice::Pi,
            (_, Some(s)) => return Err(CliError::Config(format!("well sector `{s}`"))),
        };
        let order = match cli.command {
            CommandKind::Chart => g.order.unwrap_or(4),
            CommandKind::Compare => g.order.unwrap_or(PRINTED_ENERGY_TERMS),
            CommandKind::Wavefunction | CommandKind::Tunneling => g.order.unwrap_or(2),
        };
        if cli.command == CommandKind::Compare && !(1..=GENERATED_ENERGY_TERMS).contains(&order) {
            return Err(CliError::Config(format!("compare order must be in 1..={GENERATED_ENERGY_TERMS}")));
        }
        if cli.command == CommandKind::Wavefunction && order > 2 {
            return Err(CliError::Config("wavefunction order must be at most 2".into()));
        }
        Ok(Self {
            command: cli.command,
            a,
            b,
            mu,
            order,
            sector,
            format: g.format,
            out: g.out.clone(),
            strict: g.strict,
            seed: g.seed,
        })
    }

    fn well(&self) -> Well {
        match self.sector {
            SectorChoice::Pi => Well::Pi,
            _ => Well::Zero,
        }
    }

    fn grid(&self) -> Vec<(f64, f64)> {
        self.a.iter().flat_map(|&a| self.b.iter().map(move |&b| (a, b))).collect()
    }

    fn points(&self) -> Vec<(f64, f64, u32)> {
        self.grid()
            .into_iter()
            .flat_map(|(a, b)| self.mu.iter().map(move |&m| (a, b, m)))
            .collect()
    }
}

/// Output table: metadata plus columns and rows of JSON scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub advisories: Vec<String>,
}

impl Table {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                let mut s = serde_json::to_string_pretty(&json!({ "metadata": self.metadata, "rows": rows }))
                    .expect("tables serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                if let Value::Object(m) = &self.metadata {
                    for (k, v) in m {
                        let _ = writeln!(s, "# {k}: {v}");
                    }
                }
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| match v {
                            Value::String(t) => t.clone(),
                            Value::Null => String::new(),
                            other => other.to_string(),
                        })
                        .collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn metadata(config: &RunConfig, orders: Value, oracle_k: Value, columns: &str) -> Value {
    json!({
        "config": config,
        "version": VERSION,
        "orders": orders,
        "oracle_K": oracle_k,
        "columns": columns,
        "units": "dimensionless",
    })
}

/// Finite numbers as JSON numbers, anything else as null.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn cmd_chart(config: &RunConfig) -> Result<Table, CliError> {
    let n_max = config.order;
    let grid = config.grid();
    let rows: Vec<Vec<Vec<Value>>> = grid
        .par_iter()
        .map(|&(a, b)| -> Result<Vec<Vec<Value>>, CliError> {
            let p = PendulumParams::new(a, b)?;
            let mut rows = Vec::new();
            match config.sector {
                SectorChoice::Antiperiodic => {
                    let r = oracle::eigenvalues(&oracle::FourierMatrixSpec::auto(p, Sector::Antiperiodic), 2 * n_max + 2)?;
                    r.require_converged()?;
                    for (i, e) in r.energies.iter().enumerate() {
                        rows.push(vec![num(a), num(b), json!("antiperiodic"), json!(i), num(*e), num(e - b / 2.0)]);
                    }
                }
                _ => {
                    for edge in oracle::band_edges(&p, n_max)? {
                        rows.push(vec![num(a), num(b), json!("a"), json!(edge.n), num(edge.a), num(edge.a - b / 2.0)]);
                        if let Some(e) = edge.b {
                            rows.push(vec![num(a), num(b), json!("b"), json!(edge.n), num(e), num(e - b / 2.0)]);
                        }
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let k: Vec<Value> = grid.iter().map(|&(_, b)| json!(default_truncation(b).max(n_max + 24))).collect();
    let columns = vec!["A", "B", "label", "n", "energy", "energy_minus_half_B"];
    Ok(Table {
        metadata: metadata(
            config,
            json!({ "band_index_max": n_max }),
            Value::Array(k),
            "label a/b: band edges a_n, b_n of the periodic sector (antiperiodic: eigenvalue index); energy_minus_half_B: Mathieu characteristic value at A = 0",
        ),
        columns,
        rows: rows.into_iter().flatten().collect(),
        advisories: Vec::new(),
    })
}

pub fn cmd_compare(config: &RunConfig) -> Result<Table, CliError> {
    let well = config.well();
    let points = config.points();
    let results: Vec<(Vec<Vec<Value>>, Option<String>, usize)> = points
        .par_iter()
        .map(|&(a, b, mu)| -> Result<_, CliError> {
            let p = PendulumParams::new(a, b)?;
            let count = 2 * mu as usize + 8;
            let (spectrum, states) = oracle::well_spectrum(&p, count)?;
            let state = states
                .iter()
                .find(|s| s.well == well && s.mu == mu)
                .ok_or_else(|| CliError::Numerical(Error::Config(format!("state mu={mu} not found"))))?;
            let mut rows = Vec::new();
            let mut advisory = None;
            for terms in 1..=config.order {
                let s = oscillatory_energy(&p, well, mu, terms);
                if advisory.is_none() {
                    advisory = s.advisory.clone();
                }
                rows.push(vec![
                    num(a),
                    num(b),
                    json!(mu),
                    json!(terms),
                    num(state.energy),
                    num(s.value),
                    num((s.value - state.energy).abs()),
                    num(s.error_estimate),
                    json!(s.advisory.clone().unwrap_or_default()),
                ]);
            }
            let note = advisory.map(|m| format!("A={a} B={b} mu={mu}: {m}"));
            Ok((rows, note, spectrum.truncation))
        })
        .collect::<Result<_, _>>()?;
    let advisories: Vec<String> = results.iter().filter_map(|r| r.1.clone()).collect();
    let k: Vec<Value> = results.iter().map(|r| json!(r.2)).collect();
    Ok(Table {
        metadata: metadata(
            config,
            json!({ "series_terms": (1..=config.order).collect::<Vec<_>>() }),
            Value::Array(k),
            "oracle: matrix energy of the well state; series: terms kept; estimate: first omitted term",
        ),
        columns: vec!["A", "B", "mu", "terms", "oracle", "series", "abs_error", "estimate", "advisory"],
        rows: results.into_iter().flat_map(|r| r.0).collect(),
        advisories,
    })
}

/// Region of `phi` relative to the well of `(mu, B)`: `well`, `overlap` or `barrier`.
pub fn region_tag(well: Well, mu: u32, b: f64, phi: f64) -> &'static str {
    let near = match well {
        Well::Zero => phi.cos() > 0.0,
        Well::Pi => phi.cos() < 0.0,
    };
    let x = phi.sin().powi(2) * b.sqrt() / (mu as f64 + 0.5);
    if near && x < 1.0 {
        "well"
    } else if near && x <= 4.0 {
        "overlap"
    } else {
        "barrier"
    }
}

pub const WAVEFUNCTION_SAMPLES: usize = 256;

pub fn cmd_wavefunction(config: &RunConfig) -> Result<Table, CliError> {
    let well = config.well();
    let order = config.order;
    let points = config.points();
    let results: Vec<(Vec<Vec<Value>>, Option<String>)> = points
        .par_iter()
        .map(|&(a, b, mu)| -> Result<_, CliError> {
            let p = PendulumParams::new(a, b)?;
            let kind = if mu % 2 == 0 { Kind::C } else { Kind::S };
            let inner = WellExpansion::new(&p, mu, kind, well, order, WellOptions::default())?;
            let outer = BarrierWave::new(&p, mu, well, Branch::Plus, order, BarrierForm::Printed);
            let m = mu as f64 + 0.5;
            // Match the barrier branch to the well function where sin^2 phi = 2 mu~ / B^{1/2}.
            let match_phi = (2.0 * m / b.sqrt()).min(1.0).sqrt().asin();
            let match_phi = match well {
                Well::Zero => match_phi,
                Well::Pi => PI - match_phi,
            };
            let scale = inner.eval(match_phi).value / outer.eval(match_phi).re;
            let mut rows = Vec::new();
            for i in 1..WAVEFUNCTION_SAMPLES {
                let phi = PI * i as f64 / WAVEFUNCTION_SAMPLES as f64;
                let tag = region_tag(well, mu, b, phi);
                if tag != "barrier" {
                    let v = inner.eval(phi);
                    rows.push(vec![num(a), num(b), json!(mu), num(phi), json!(tag), json!("well"), num(v.value), num(v.estimate)]);
                }
                if tag != "well" && outer.in_region(phi) {
                    let v = scale * outer.eval(phi).re;
                    let est = if order == 0 {
                        Value::Null
                    } else {
                        let prev = BarrierWave::new(&p, mu, well, Branch::Plus, order - 1, BarrierForm::Printed);
                        num((v - scale * prev.eval(phi).re).abs())
                    };
                    rows.push(vec![num(a), num(b), json!(mu), num(phi), json!(tag), json!("barrier"), num(v), est]);
                }
            }
            let note = (!p.is_deep_well(mu)).then(|| format!("A={a} B={b} mu={mu}: shallow well"));
            Ok((rows, note))
        })
        .collect::<Result<_, _>>()?;
    let advisories = results.iter().filter_map(|r| r.1.clone()).collect();
    Ok(Table {
        metadata: metadata(
            config,
            json!({ "well_order": order, "barrier_order": order }),
            Value::Null,
            "region: well/overlap/barrier; representation: well (parabolic cylinder sum, normalized) or barrier (psi_+, matched at sin^2 phi = 2 mu~/B^{1/2}); estimate: first omitted order (well) or last kept order (barrier)",
        ),
        columns: vec!["A", "B", "mu", "phi", "region", "representation", "value", "estimate"],
        rows: results.into_iter().flat_map(|r| r.0).collect(),
        advisories,
    })
}

pub fn cmd_tunneling(config: &RunConfig) -> Result<Table, CliError> {
    let points = config.points();
    let results: Vec<(Vec<Value>, Option<String>, usize)> = points
        .par_iter()
        .map(|&(a, b, mu)| -> Result<_, CliError> {
            let p = PendulumParams::new(a, b)?;
            let r = splitting_report(&p, mu, ActionChoice::Leading)?;
            let k = default_truncation(b).max(mu as usize + 25);
            let gap = if a == 0.0 {
                let edges = oracle::band_edges(&p, mu as usize + 1)?;
                let lower = edges[mu as usize].a;
                let upper = edges[mu as usize + 1].b.expect("b_n exists for n >= 1");
                Some(upper - lower)
            } else {
                None
            };
            let row = vec![
                num(a),
                num(b),
                json!(mu),
                num(r.e0),
                num(r.e_pi),
                num(r.gamma),
                num(r.e_plus),
                num(r.e_minus),
                num(r.delta),
                num(r.theta),
                r.s_plus.map(num).unwrap_or(Value::Null),
                r.s_minus.map(num).unwrap_or(Value::Null),
                gap.map(num).unwrap_or(Value::Null),
                gap.map(|g| num(g / (2.0 * r.gamma))).unwrap_or(Value::Null),
            ];
            let note = (!p.is_deep_well(mu)).then(|| format!("A={a} B={b} mu={mu}: shallow well"));
            Ok((row, note, k))
        })
        .collect::<Result<_, _>>()?;
    let advisories = results.iter().filter_map(|r| r.1.clone()).collect();
    let k: Vec<Value> = results.iter().map(|r| json!(r.2)).collect();
    Ok(Table {
        metadata: metadata(
            config,
            json!({ "energy_terms": PRINTED_ENERGY_TERMS, "action": "leading" }),
            Value::Array(k),
            "oracle_gap: b_{mu+1} - a_mu at A = 0; gap_ratio: oracle_gap / (2 gamma)",
        ),
        columns: vec![
            "A", "B", "mu", "e0", "e_pi", "gamma", "e_plus", "e_minus", "delta", "theta", "s_plus", "s_minus", "oracle_gap",
            "gap_ratio",
        ],
        rows: results.into_iter().map(|r| r.0).collect(),
        advisories,
    })
}

pub fn execute(config: &RunConfig) -> Result<Table, CliError> {
    let table = match config.command {
        CommandKind::Chart => cmd_chart(config),
        CommandKind::Compare => cmd_compare(config),
        CommandKind::Wavefunction => cmd_wavefunction(config),
        CommandKind::Tunneling => cmd_tunneling(config),
    }?;
    if config.strict {
        if let Some(first) = table.advisories.first() {
            return Err(CliError::Strict(first.clone()));
        }
    }
    Ok(table)
}

/// Parse, execute and write the output; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("kapitza: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<(), CliError> {
    let config = RunConfig::from_cli(cli)?;
    let table = execute(&config)?;
    for note in &table.advisories {
        eprintln!("advisory: {note}");
    }
    let text = table.render(config.format);
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
