//! Batch command-line surface over the estimation library.
//!
//! Every command prints CSV (RFC 4180) or JSON to stdout or a file. All
//! randomness flows from the --seed flag, and identical invocations produce
//! byte-identical output.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use entest::gain::{average_gain_with_nodes, fit_asymptote};
use entest::local::local_gain_with_nodes;
use entest::oracle::{verify_spectrum, AverageMethod};
use entest::prior::PriorDensity;
use entest::simulate::simulate_experiment;
use entest::spectrum::Spectrum;

const SCHEMA: &str = "entest/1";
const OUTPUT_DIR_ENV: &str = "ENTEST_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "entest",
    version,
    about = "Optimal estimation of two-qubit entanglement and single-qubit mixing from N copies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputOptions,
}

#[derive(Args)]
struct OutputOptions {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path (stdout when omitted). Relative paths are resolved
    /// against $ENTEST_OUTPUT_DIR when that variable is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    MonteCarlo,
    EulerQuadrature,
}

impl From<Method> for AverageMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::MonteCarlo => AverageMethod::MonteCarlo,
            Method::EulerQuadrature => AverageMethod::EulerQuadrature,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Block decomposition for N copies: spin, multiplicity, dimension, and
    /// weights on a b grid.
    Spectrum {
        #[arg(long)]
        n: u32,
        /// Comma-separated b values for the weight columns.
        #[arg(long, default_value = "0,0.25,0.5,0.75,1", value_delimiter = ',')]
        b_grid: Vec<f64>,
    },
    /// Expected gain for each requested copy count.
    Table {
        /// Comma-separated list of N values.
        #[arg(long, required = true, value_delimiter = ',')]
        n: Vec<u32>,
        /// Report gains in nats instead of bits.
        #[arg(long)]
        nats: bool,
        #[arg(long, default_value = "quadratic")]
        prior: String,
        /// Starting Gauss-Legendre order for the refinement loop (>= 2).
        #[arg(long, default_value_t = 200)]
        nodes: usize,
    },
    /// Least-squares slope of gain against log2(N) from a table CSV.
    Fit {
        /// CSV produced by `table` (columns n, gain).
        #[arg(long)]
        input: PathBuf,
    },
    /// Brute-force verification of the closed-form block weights.
    Oracle {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "0,0.3,0.7,1", value_delimiter = ',')]
        b: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Method::EulerQuadrature)]
        method: Method,
        /// Monte Carlo sample budget (ignored by the deterministic rule).
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Failure threshold for the worst deviation. Default: 1e-8 for the
        /// deterministic rule, 3x the Monte Carlo standard error otherwise.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Expected gain of the optimal local (one-party) strategy.
    Local {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "quadratic")]
        prior: String,
        /// Starting Gauss-Legendre order for the refinement loop (>= 2).
        #[arg(long, default_value_t = 200)]
        nodes: usize,
    },
    /// Seeded experiment simulation: b ~ prior, outcome ~ p(k|b).
    Simulate {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "quadratic")]
        prior: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Spectrum { n, b_grid } => cmd_spectrum(cli, *n, b_grid),
        Command::Table {
            n,
            nats,
            prior,
            nodes,
        } => cmd_table(cli, n, *nats, prior, *nodes),
        Command::Fit { input } => cmd_fit(cli, input),
        Command::Oracle {
            n,
            b,
            method,
            budget,
            seed,
            tolerance,
        } => cmd_oracle(cli, *n, b, (*method).into(), *budget, *seed, *tolerance),
        Command::Local { n, prior, nodes } => cmd_local(cli, *n, prior, *nodes),
        Command::Simulate {
            n,
            trials,
            seed,
            prior,
        } => cmd_simulate(cli, *n, *trials, *seed, prior),
    }
}

fn cmd_spectrum(
    cli: &Cli,
    n: u32,
    b_grid: &[f64],
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let spec = Spectrum::new(n)?;
    let mut headers = vec![
        "outcome".to_string(),
        "j".to_string(),
        "copies".to_string(),
        "block_dim".to_string(),
    ];
    for b in b_grid {
        headers.push(format!("weight_b_{b}"));
    }
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for (idx, block) in spec.blocks().iter().enumerate() {
        let mut row = vec![
            (idx + 1).to_string(),
            block.j().to_string(),
            block.copies().to_string(),
            block.block_dim().to_string(),
        ];
        let mut weights = Vec::new();
        for &b in b_grid {
            let w = entest::spectrum::block_weight(n, block.j(), b)?;
            row.push(format!("{w:.12}"));
            weights.push(w);
        }
        rows.push(row);
        json_rows.push(json!({
            "outcome": idx + 1,
            "j": block.j().to_string(),
            "copies": block.copies().to_string(),
            "block_dim": block.block_dim(),
            "weights": b_grid.iter().zip(&weights)
                .map(|(b, w)| json!({"b": b, "weight": w})).collect::<Vec<_>>(),
        }));
    }
    let payload = json!({
        "schema": SCHEMA,
        "command": "spectrum",
        "n": n,
        "blocks": json_rows,
    });
    emit(cli, &headers, rows, payload)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(
    cli: &Cli,
    ns: &[u32],
    nats: bool,
    prior_spec: &str,
    nodes: usize,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if ns.is_empty() {
        return Err("table needs at least one N".into());
    }
    let prior = parse_prior(prior_spec)?;
    let unit = if nats { "gain_nats" } else { "gain_bits" };
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for &n in ns {
        let report = average_gain_with_nodes(&Spectrum::new(n)?, &prior, nodes)?;
        let gain = if nats {
            report.average_gain_bits * std::f64::consts::LN_2
        } else {
            report.average_gain_bits
        };
        rows.push(vec![n.to_string(), format!("{gain:.6}")]);
        json_rows.push(json!({
            "n": n,
            unit: gain,
            "marginals": report.marginals,
            "quad_error": report.quad_error,
        }));
    }
    let payload = json!({
        "schema": SCHEMA,
        "command": "table",
        "prior": prior_spec,
        "rows": json_rows,
    });
    emit(cli, &["n".to_string(), unit.to_string()], rows, payload)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(cli: &Cli, input: &PathBuf) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut reader = csv::Reader::from_path(input)?;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let n: u32 = record.get(0).ok_or("missing n column")?.trim().parse()?;
        let gain: f64 = record.get(1).ok_or("missing gain column")?.trim().parse()?;
        points.push((n, gain));
    }
    let fit = fit_asymptote(&points)?;
    let rows = vec![vec![
        format!("{:.6}", fit.slope),
        format!("{:.6}", fit.intercept),
        points.len().to_string(),
    ]];
    let payload = json!({
        "schema": SCHEMA,
        "command": "fit",
        "slope": fit.slope,
        "intercept": fit.intercept,
        "points": points.len(),
    });
    emit(
        cli,
        &[
            "slope".to_string(),
            "intercept".to_string(),
            "points".to_string(),
        ],
        rows,
        payload,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(
    cli: &Cli,
    n: u32,
    b_values: &[f64],
    method: AverageMethod,
    budget: u64,
    seed: u64,
    tolerance: Option<f64>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let report = verify_spectrum(n, b_values, method, budget, seed)?;
    let mut rows = Vec::new();
    let mut ok = true;
    for row in &report.rows {
        let threshold = tolerance.unwrap_or(match method {
            AverageMethod::EulerQuadrature => 1e-8,
            AverageMethod::MonteCarlo => 3.0 * row.std_error,
        });
        if row.projection_deviation > threshold {
            ok = false;
        }
        rows.push(vec![
            seed.to_string(),
            format!("{}", row.b),
            format!("{:.3e}", row.projection_deviation),
            row.eigensum_deviation
                .map(|d| format!("{d:.3e}"))
                .unwrap_or_else(|| "ambiguous".to_string()),
            format!("{:.3e}", row.std_error),
            format!("{:.3e}", row.leakage),
            format!("{threshold:.3e}"),
        ]);
    }
    let payload = json!({
        "schema": SCHEMA,
        "command": "oracle",
        "report": &report,
        "tolerance": tolerance,
        "pass": ok,
    });
    emit(
        cli,
        &[
            "seed".to_string(),
            "b".to_string(),
            "projection_deviation".to_string(),
            "eigensum_deviation".to_string(),
            "std_error".to_string(),
            "leakage".to_string(),
            "threshold".to_string(),
        ],
        rows,
        payload,
    )?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_local(
    cli: &Cli,
    n: u32,
    prior_spec: &str,
    nodes: usize,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let prior = parse_prior(prior_spec)?;
    let report = local_gain_with_nodes(n, &prior, nodes)?;
    let mut rows = Vec::new();
    for (idx, (p, g)) in report
        .marginals
        .iter()
        .zip(&report.outcome_gains_bits)
        .enumerate()
    {
        rows.push(vec![
            n.to_string(),
            (idx + 1).to_string(),
            format!("{p:.12}"),
            format!("{g:.6}"),
            format!("{:.6}", report.average_gain_bits),
        ]);
    }
    let payload = json!({
        "schema": SCHEMA,
        "command": "local",
        "prior": prior_spec,
        "report": &report,
    });
    emit(
        cli,
        &[
            "n".to_string(),
            "outcome".to_string(),
            "marginal".to_string(),
            "outcome_gain_bits".to_string(),
            "average_gain_bits".to_string(),
        ],
        rows,
        payload,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    cli: &Cli,
    n: u32,
    trials: u64,
    seed: u64,
    prior_spec: &str,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if trials < 1 {
        return Err("simulate needs at least one trial".into());
    }
    let prior = parse_prior(prior_spec)?;
    let spec = Spectrum::new(n)?;
    let trace = simulate_experiment(&spec, &prior, trials, seed)?;
    let mut rows = Vec::new();
    for (idx, t) in trace.trials.iter().enumerate() {
        rows.push(vec![
            seed.to_string(),
            idx.to_string(),
            format!("{:.17e}", t.b_true),
            t.outcome.to_string(),
            format!("{:.12}", t.posterior_mean),
            format!("{:.6}", t.gain_bits),
        ]);
    }
    let payload = json!({
        "schema": SCHEMA,
        "command": "simulate",
        "n": n,
        "seed": seed,
        "outcome_counts": trace.outcome_counts,
        "empirical_gain_bits": trace.empirical_gain_bits,
        "trials": trace.trials.iter().enumerate().map(|(idx, t)| json!({
            "trial": idx,
            "b_true": t.b_true,
            "outcome": t.outcome,
            "posterior_mean": t.posterior_mean,
            "gain_bits": t.gain_bits,
        })).collect::<Vec<_>>(),
    });
    emit(
        cli,
        &[
            "seed".to_string(),
            "trial".to_string(),
            "b_true".to_string(),
            "outcome".to_string(),
            "posterior_mean".to_string(),
            "gain_bits".to_string(),
        ],
        rows,
        payload,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn parse_prior(spec: &str) -> Result<PriorDensity, Box<dyn std::error::Error>> {
    match spec {
        "quadratic" => Ok(PriorDensity::quadratic()),
        "uniform" => Ok(PriorDensity::uniform()),
        other => {
            let Some(list) = other.strip_prefix("poly:") else {
                return Err(format!(
                    "unknown prior '{other}' (expected quadratic, uniform, or poly:c0,c1,...)"
                )
                .into());
            };
            let coeffs = list
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PriorDensity::from_f64_coeffs(&coeffs)?)
        }
    }
}

fn emit(
    cli: &Cli,
    headers: &[String],
    rows: Vec<Vec<String>>,
    payload: serde_json::Value,
) -> Result<(), Box<dyn std::error::Error>> {
    let bytes = match cli.output.format {
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
            writer.write_record(headers)?;
            for row in rows {
                writer.write_record(&row)?;
            }
            writer.into_inner()?
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&payload)?;
            out.push(b'\n');
            out
        }
    };
    match resolve_output(&cli.output.output) {
        None => std::io::stdout().write_all(&bytes)?,
        Some(path) => std::fs::write(path, &bytes)?,
    }
    Ok(())
}

fn resolve_output(path: &Option<PathBuf>) -> Option<PathBuf> {
    let path = path.as_ref()?;
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            return Some(PathBuf::from(dir).join(path));
        }
    }
    Some(path.clone())
}
