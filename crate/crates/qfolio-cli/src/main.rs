//! Command-line front door: prices -> stats -> frontier / QUBO -> solve/sweep.
//!
//! Every run writes its data files plus a `run_manifest.json` echoing the
//! effective parameters, so any output can be regenerated from the manifest
//! alone. All randomness flows from a single `--seed`; re-running a command
//! with the same inputs produces byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qfolio::market_data::{self, AssetStats};
use qfolio::markowitz::{self, DEFAULT_RF, DEFAULT_SAMPLES};
use qfolio::qaoa::{self, OptimizeConfig};
use qfolio::qubo_ising::{self, IsingHamiltonian, MatrixKind};

/// Exit codes: 0 success, 2 usage/input error, 3 internal failure.
enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> CliError {
        CliError::Input(e.to_string())
    }

    fn internal(e: impl std::fmt::Display) -> CliError {
        CliError::Internal(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(name = "qfolio", version, about = "Portfolio optimization toolkit")]
struct Cli {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker cap; results do not depend on it. Env: QFOLIO_THREADS.
    #[arg(long, global = true, env = "QFOLIO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-asset return statistics from a closing-price CSV.
    Stats {
        /// CSV with header `date,T1,...,Tq`.
        prices: PathBuf,
        /// Trading periods per year used for annualization.
        #[arg(long, default_value_t = 250)]
        period: u32,
    },
    /// Monte Carlo efficient frontier from a stats.json file.
    Frontier {
        stats: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Risk-free rates for the Sharpe rankings.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RF)]
        rf: Vec<f64>,
    },
    /// Encode budget-constrained selection as a QUBO and Ising Hamiltonian.
    Qubo {
        stats: PathBuf,
        /// Risk-aversion weight on the quadratic term.
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        /// Number of assets to pick.
        #[arg(long, default_value_t = 2)]
        budget: usize,
        /// Budget-penalty strength.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Risk matrix fed into the quadratic term.
        #[arg(long, value_enum, default_value_t = MatrixArg::Correlation)]
        matrix: MatrixArg,
    },
    /// Minimize an ising.json Hamiltonian.
    Solve {
        ising: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Qaoa)]
        method: Method,
        #[arg(long, default_value_t = 20)]
        layers: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Objective evaluations per restart (default 200 per parameter).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Optimize across a range of circuit depths, warm-starting each depth.
    Sweep {
        ising: PathBuf,
        /// Inclusive depth range `a..b`, or a single depth.
        #[arg(long, default_value = "1..20")]
        layers: String,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatrixArg {
    Covariance,
    Correlation,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Brute,
    Qaoa,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    fs::create_dir_all(&cli.out).map_err(CliError::input)?;
    match &cli.command {
        Command::Stats { prices, period } => cmd_stats(&cli.out, prices, *period),
        Command::Frontier {
            stats,
            samples,
            seed,
            rf,
        } => cmd_frontier(&cli.out, stats, *samples, *seed, rf),
        Command::Qubo {
            stats,
            b,
            budget,
            alpha,
            matrix,
        } => cmd_qubo(&cli.out, stats, *b, *budget, *alpha, *matrix),
        Command::Solve {
            ising,
            method,
            layers,
            restarts,
            seed,
            budget,
        } => cmd_solve(&cli.out, ising, *method, *layers, *restarts, *seed, *budget),
        Command::Sweep {
            ising,
            layers,
            restarts,
            seed,
            budget,
        } => cmd_sweep(&cli.out, ising, layers, *restarts, *seed, *budget),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult {
    fs::write(dir.join(name), contents)
        .map_err(|e| CliError::internal(format!("writing {name}: {e}")))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::internal)?;
    text.push('\n');
    write_file(dir, name, &text)
}

fn write_manifest(dir: &Path, manifest: serde_json::Value) -> CliResult {
    write_json(dir, "run_manifest.json", &manifest)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, kind: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("reading {kind} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("parsing {kind} {}: {e}", path.display())))
}

fn cmd_stats(out: &Path, prices: &Path, period: u32) -> CliResult {
    let series = market_data::load_prices(prices).map_err(CliError::input)?;
    let returns = market_data::compute_returns(&series).map_err(CliError::input)?;
    let stats = market_data::compute_stats(&returns, period).map_err(CliError::input)?;
    write_json(out, "stats.json", &stats)?;
    write_manifest(
        out,
        json!({
            "command": "stats",
            "prices": prices.display().to_string(),
            "period_scale": period,
            "rows": series.dates.len(),
            "tickers": stats.tickers,
            "outputs": ["stats.json"],
        }),
    )
}

fn cmd_frontier(out: &Path, stats: &Path, samples: usize, seed: u64, rf: &[f64]) -> CliResult {
    let stats: AssetStats = read_json(stats, "stats")?;
    let report =
        markowitz::sample_portfolios(&stats, samples, seed, rf).map_err(CliError::input)?;

    let mut csv = String::from("ret,vol");
    for r in rf {
        let _ = write!(csv, ",sharpe@{r}");
    }
    csv.push('\n');
    for p in &report.samples {
        let _ = write!(csv, "{},{}", p.ret, p.vol);
        for (_, s) in &p.sharpe_by_rf {
            let _ = write!(csv, ",{s}");
        }
        csv.push('\n');
    }
    write_file(out, "frontier.csv", &csv)?;
    write_json(
        out,
        "named.json",
        &json!({
            "named": report.named,
            "fit_coeffs": report.fit_coeffs,
        }),
    )?;
    write_manifest(
        out,
        json!({
            "command": "frontier",
            "samples": samples,
            "seed": seed,
            "rf": rf,
            "outputs": ["frontier.csv", "named.json"],
        }),
    )
}

fn cmd_qubo(
    out: &Path,
    stats: &Path,
    b: f64,
    budget: usize,
    alpha: f64,
    matrix: MatrixArg,
) -> CliResult {
    let stats: AssetStats = read_json(stats, "stats")?;
    let kind = match matrix {
        MatrixArg::Covariance => MatrixKind::Covariance,
        MatrixArg::Correlation => MatrixKind::Correlation,
    };
    let qubo = qubo_ising::build_portfolio_qubo(&stats, b, budget, alpha, kind)
        .map_err(CliError::input)?;
    let ising = qubo_ising::qubo_to_ising(&qubo);
    write_json(out, "qubo.json", &qubo)?;
    write_json(out, "ising.json", &ising)?;
    write_manifest(
        out,
        json!({
            "command": "qubo",
            "b": b,
            "budget": budget,
            "alpha": alpha,
            "penalty_enabled": alpha > 0.0,
            "matrix": match matrix {
                MatrixArg::Covariance => "covariance",
                MatrixArg::Correlation => "correlation",
            },
            "outputs": ["qubo.json", "ising.json"],
        }),
    )
}

/// `bitstring,probability` rows, highest probability first (ties by index).
fn histogram_csv(probs: &[f64], n: usize) -> String {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap().then(a.cmp(&b)));
    let mut csv = String::from("bitstring,probability\n");
    for idx in order {
        let _ = writeln!(csv, "{},{}", qubo_ising::bitstring(idx, n), probs[idx]);
    }
    csv
}

fn cmd_solve(
    out: &Path,
    ising: &Path,
    method: Method,
    layers: usize,
    restarts: usize,
    seed: u64,
    budget: Option<usize>,
) -> CliResult {
    let h: IsingHamiltonian = read_json(ising, "ising")?;
    let energies = qubo_ising::diagonal_energies(&h).map_err(CliError::input)?;
    match method {
        Method::Brute => {
            let best = (0..energies.len())
                .min_by(|&a, &b| {
                    energies[a]
                        .partial_cmp(&energies[b])
                        .unwrap()
                        .then(a.cmp(&b))
                })
                .ok_or_else(|| CliError::internal("empty energy table"))?;
            let mut probs = vec![0.0; energies.len()];
            probs[best] = 1.0;
            write_json(
                out,
                "result.json",
                &json!({
                    "method": "brute",
                    "best_bitstring": qubo_ising::bitstring(best, h.n),
                    "best_index": best,
                    "energy": energies[best],
                    "energies": energies,
                }),
            )?;
            write_file(out, "histogram.csv", &histogram_csv(&probs, h.n))?;
        }
        Method::Qaoa => {
            let mut cfg = OptimizeConfig::new(layers, restarts, seed);
            cfg.budget_per_restart = budget;
            let result = qaoa::optimize(&h, &cfg).map_err(CliError::input)?;
            if result.energy < result.ground_energy - 1e-9 {
                return Err(CliError::Internal(format!(
                    "variational energy {} below exhaustive minimum {}",
                    result.energy, result.ground_energy
                )));
            }
            write_file(
                out,
                "histogram.csv",
                &histogram_csv(&result.state_probs, h.n),
            )?;
            write_json(
                out,
                "result.json",
                &json!({
                    "method": "qaoa",
                    "best_bitstring": qubo_ising::bitstring(result.ground_index, h.n),
                    "result": result,
                }),
            )?;
        }
    }
    write_manifest(
        out,
        json!({
            "command": "solve",
            "method": match method {
                Method::Brute => "brute",
                Method::Qaoa => "qaoa",
            },
            "layers": layers,
            "restarts": restarts,
            "seed": seed,
            "budget_per_restart": budget,
            "outputs": ["result.json", "histogram.csv"],
        }),
    )
}

/// Parse `a..b` (inclusive) or a single integer into a depth list.
fn parse_layer_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::Input(format!(
            "invalid layer range `{text}`; expected `a..b` or `p`"
        ))
    };
    let range = if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect::<Vec<_>>()
    } else {
        vec![text.trim().parse().map_err(|_| bad())?]
    };
    if range.is_empty() || range[0] == 0 {
        return Err(CliError::Input(format!(
            "layer range `{text}` is empty or starts at 0"
        )));
    }
    Ok(range)
}

fn cmd_sweep(
    out: &Path,
    ising: &Path,
    layers: &str,
    restarts: usize,
    seed: u64,
    budget: Option<usize>,
) -> CliResult {
    let h: IsingHamiltonian = read_json(ising, "ising")?;
    let depths = parse_layer_range(layers)?;
    let rows = qaoa::layer_sweep(&h, &depths, restarts, seed, budget).map_err(CliError::input)?;

    let mut csv =
        String::from("p,energy_mean2,ground_prob_mean2,energy_best,ground_prob_best,evals\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.layers,
            r.energy_mean2,
            r.ground_prob_mean2,
            r.energy_best,
            r.ground_prob_best,
            r.evals
        );
    }
    write_file(out, "sweep.csv", &csv)?;
    write_manifest(
        out,
        json!({
            "command": "sweep",
            "layers": depths,
            "restarts": restarts,
            "seed": seed,
            "budget_per_restart": budget,
            "evals_per_depth": rows.iter().map(|r| r.evals).collect::<Vec<_>>(),
            "outputs": ["sweep.csv"],
        }),
    )
}
