//! Command-line dispatcher. Exit codes: 0 success, 1 invalid input, 2
//! computational failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig, SCHEMA_VERSION};
use crate::graph::build_graph;
use crate::measure::MarkovMeasure;
use crate::par::{self, Execution};
use crate::params::ConstraintParams;
use crate::scs::{scs_exact, ScsLimits};
use crate::spectral::{self, SpectralData};
use crate::strand::StrandFormat;
use crate::synthesis::{cost_report, ReferenceSeq};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "RLL_SYNTH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rll-synth", version, about = "Run-length-limited strands and synthesis cost")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Perron eigenvalue and capacity of the constraint.
    Capacity {
        #[command(flatten)]
        params: ParamArgs,
        /// Bisection tolerance on the eigenvalue.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Right (and optionally left) Perron eigenvector as CSV.
    Eigenvector {
        #[command(flatten)]
        params: ParamArgs,
        /// Also print the left eigenvector, normalized so that Σ ξφ = 1.
        #[arg(long)]
        left: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample a batch of strands from the maximum-entropy measure.
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Digits)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Synthesis cost of a batch file against a reference.
    Cost {
        #[arg(long)]
        batch: PathBuf,
        /// `canonical`, `periodic:<w>`, `finite:<w>` or `eventual:<p>/<c>`.
        #[arg(long)]
        reference: String,
        #[arg(long, value_enum, default_value_t = Format::Digits)]
        format: Format,
        /// Alphabet size; inferred from the batch when omitted.
        #[arg(long)]
        r: Option<usize>,
        /// Include the per-strand synthesis positions.
        #[arg(long)]
        tau: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact shortest common supersequence of a small batch.
    Scs {
        #[arg(long)]
        batch: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Digits)]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo experiments.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The transfer graph: summary JSON, dense matrix, or sparse CSV.
    Graph {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, conflicts_with = "csv")]
        dense: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long)]
    r: usize,
    #[arg(long)]
    k: usize,
}

impl ParamArgs {
    fn params(&self) -> Result<ConstraintParams> {
        ConstraintParams::new(self.r, self.k)
    }
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Digits,
    Acgt,
}

impl From<Format> for StrandFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Digits => StrandFormat::Digits,
            Format::Acgt => StrandFormat::Acgt,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Theorem1,
    Dominance,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(threads) = std::env::var(THREADS_ENV) {
        match threads.parse::<usize>() {
            Ok(t) if t > 0 => par::init_thread_pool(t),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer");
                return 1;
            }
        }
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_batch(path: &Path, format: StrandFormat) -> Result<Vec<Vec<u8>>> {
    format.parse_batch(&read(path)?)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Capacity { params, tol, out } => {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::InvalidParams("tol must be ≥ 0".into()));
            }
            let params = params.params()?;
            let lambda = spectral::perron_eigenvalue(&params, tol)?;
            let capacity = lambda.ln() / (params.r() as f64).ln();
            let text = if out.csv {
                format!("r,k,lambda,capacity\n{},{},{lambda},{capacity}\n", params.r(), params.k())
            } else {
                to_json(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "r": params.r(),
                    "k": params.k(),
                    "lambda": lambda,
                    "capacity": capacity,
                }))
            };
            emit(out.output.as_deref(), &text)
        }
        Command::Eigenvector { params, left, output } => {
            let params = params.params()?;
            let data = if left {
                SpectralData::for_params(params)?
            } else {
                let lambda = spectral::perron_eigenvalue_precise(&params)?;
                let phi = spectral::right_eigenvector_closed_form(&params, lambda);
                SpectralData { lambda, phi, xi: Vec::new(), capacity: 0.0 }
            };
            let mut text = String::from(if left { "state,phi,xi\n" } else { "state,phi\n" });
            for (i, phi) in data.phi.iter().enumerate() {
                if left {
                    text.push_str(&format!("{i},{phi},{}\n", data.xi[i]));
                } else {
                    text.push_str(&format!("{i},{phi}\n"));
                }
            }
            emit(output.as_deref(), &text)
        }
        Command::Sample { params, n, m, seed, format, output } => {
            let params = params.params()?;
            let format = StrandFormat::from(format);
            format.check_alphabet(params.r())?;
            let measure = MarkovMeasure::from_params(params)?;
            let batch = measure.sample_batch(n, m, seed, Execution::default());
            emit(output.as_deref(), &format.format_batch(&batch.strands))
        }
        Command::Cost { batch, reference, format, r, tau, out } => {
            let format = StrandFormat::from(format);
            let strands = read_batch(&batch, format)?;
            let r = match (r, format) {
                (Some(r), _) => r,
                (None, StrandFormat::Acgt) => 4,
                (None, StrandFormat::Digits) => {
                    strands.iter().flatten().map(|&s| s as usize + 1).max().unwrap_or(2).max(2)
                }
            };
            format.check_alphabet(r)?;
            let reference = ReferenceSeq::parse(&reference, r, format)?;
            for strand in &strands {
                ConstraintParams::new(r, 1)?.check_word(strand)?;
            }
            let report = cost_report(&strands, &reference, Execution::default())?;
            let text = if out.csv {
                let mut text = String::from("strand,final_position\n");
                for (i, t) in report.per_strand_tau.iter().enumerate() {
                    text.push_str(&format!("{i},{}\n", t.last().copied().unwrap_or(0)));
                }
                text
            } else {
                let mut value = json!({
                    "schema_version": SCHEMA_VERSION,
                    "reference": reference.to_spec(format),
                    "strands": strands.len(),
                    "batch_cost": report.batch_cost,
                });
                if tau {
                    value["per_strand_tau"] = json!(report.per_strand_tau);
                }
                to_json(&value)
            };
            emit(out.output.as_deref(), &text)
        }
        Command::Scs { batch, format, out } => {
            let format = StrandFormat::from(format);
            let strands = read_batch(&batch, format)?;
            let scs = scs_exact(&strands, ScsLimits::default())?;
            let witness = format.format_word(&scs.witness);
            let text = if out.csv {
                format!("scs_length,witness\n{},{witness}\n", scs.length)
            } else {
                to_json(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "scs_length": scs.length,
                    "witness": witness,
                }))
            };
            emit(out.output.as_deref(), &text)
        }
        Command::Experiment { kind, config, seed, out } => {
            let mut config: ExperimentConfig = serde_json::from_str(&read(&config)?)
                .map_err(|e| Error::Parse(format!("config: {e}")))?;
            config.seed = seed;
            config.validate()?;
            let text = match kind {
                ExperimentKind::Theorem1 => {
                    let report = experiments::theorem1_experiment(&config, Execution::default())?;
                    if out.csv {
                        report.to_csv()
                    } else {
                        report.to_json()
                    }
                }
                ExperimentKind::Dominance => {
                    let report = experiments::dominance_experiment(&config, Execution::default())?;
                    if out.csv {
                        let mut text = String::from("reference,t,p_alternative,p_canonical\n");
                        for check in &report.checks {
                            for (i, t) in check.grid.iter().enumerate() {
                                text.push_str(&format!(
                                    "{},{t},{},{}\n",
                                    check.reference, check.p_alternative[i], check.p_canonical[i]
                                ));
                            }
                        }
                        text
                    } else {
                        to_json(&json!({
                            "schema_version": SCHEMA_VERSION,
                            "kind": "dominance",
                            "config": config,
                            "dominance": report,
                            "passed": report.checks.iter().all(|c| c.passed),
                        }))
                    }
                }
            };
            emit(out.output.as_deref(), &text)
        }
        Command::Graph { params, dense, out } => {
            let graph = build_graph(params.params()?);
            let text = if dense {
                graph.dense_text()?
            } else if out.csv {
                graph.to_csv()
            } else {
                to_json(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "r": graph.params().r(),
                    "k": graph.params().k(),
                    "states": graph.state_count(),
                    "edges": graph.edge_count(),
                    "irreducible": graph.is_irreducible(),
                    "removed_self_loops": graph.removed_self_loops(),
                }))
            };
            emit(out.output.as_deref(), &text)
        }
    }
}
