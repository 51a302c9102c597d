use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use grouptest::simulate::{apply_noise, measure_model};
use grouptest::{Limits, MeasurementGraph, Model, NoiseSpec, OutcomeVector, SparseVector};
use grouptest_cli::config::{DecoderKind, ExperimentConfig};
use grouptest_cli::pipeline::{self, CheckOutcome};
use grouptest_cli::sweep::sweep_file;

#[derive(Parser)]
#[command(
    name = "grouptest",
    version,
    about = "Build, certify and simulate group-testing designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Kv,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the enumeration cap.
    #[arg(long)]
    max_subsets: Option<u64>,
    #[arg(long, value_enum, default_value = "kv")]
    format: Format,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(m) = self.max_subsets {
            c.limits.max_subsets = m;
        }
        if let Some(o) = &self.out {
            c.output.dir = Some(o.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured graph; writes graph.gt1 and graph.meta.
    Build(Common),
    /// Check the configured claims on the configured (or a given) graph.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Certify this graph file instead of building one.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Measure one vector on a graph, optionally with adversarial or random
    /// flips, and print the outcome vector.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated positive items.
        #[arg(long, value_delimiter = ',')]
        support: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        u: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, conflicts_with_all = ["p0", "p1"])]
        e0: Option<usize>,
        #[arg(long, conflicts_with_all = ["p0", "p1"])]
        e1: Option<usize>,
        #[arg(long)]
        p0: Option<f64>,
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode an outcome vector; prints a JSON record.
    Decode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        outcome: PathBuf,
        #[arg(long, value_enum, default_value = "trivial")]
        decoder: DecoderArg,
        #[arg(long, default_value_t = 0)]
        noise_threshold: usize,
        /// Largest support tried by the exhaustive decoder.
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        max_subsets: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: build, certify, simulate, decode, report.
    Run(Common),
    /// Run every config of a sweep file and print the summary table.
    Sweep {
        /// Sweep file (TOML).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Trivial,
    NoisyTrivial,
    Threshold,
    Exhaustive,
}

impl From<DecoderArg> for DecoderKind {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Trivial => DecoderKind::Trivial,
            DecoderArg::NoisyTrivial => DecoderKind::NoisyTrivial,
            DecoderArg::Threshold => DecoderKind::Threshold,
            DecoderArg::Exhaustive => DecoderKind::Exhaustive,
        }
    }
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), text).with_context(|| format!("writing {file}"))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn reports_text(reports: &[CheckOutcome], format: Format) -> Result<String> {
    Ok(match format {
        Format::Kv => reports
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Csv => pipeline::reports_csv(reports)?,
    })
}

fn status(failed: bool) -> ExitCode {
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn read_graph(path: &Path) -> Result<MeasurementGraph> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?
        .parse()
        .with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build(common) => {
            let config = common.load()?;
            let built = pipeline::build(&config)?;
            match config.output.dir.as_deref() {
                Some(dir) => {
                    emit(Some(dir), "graph.gt1", &built.graph.to_string())?;
                    emit(Some(dir), "graph.meta", &built.metadata.to_string())?;
                    if !built.reports.is_empty() {
                        emit(
                            Some(dir),
                            "reports.kv",
                            &reports_text(&built.reports, Format::Kv)?,
                        )?;
                    }
                }
                None => print!("{}", built.graph),
            }
            Ok(status(built.reports.iter().any(CheckOutcome::failed)))
        }
        Command::Certify { common, graph } => {
            let config = common.load()?;
            let (g, mut reports) = match graph {
                Some(path) => (read_graph(&path)?, Vec::new()),
                None => {
                    let built = pipeline::build(&config)?;
                    (built.graph, built.reports)
                }
            };
            reports.extend(pipeline::certify(&g, &config)?);
            let file = if common.format == Format::Csv {
                "reports.csv"
            } else {
                "reports.kv"
            };
            emit(
                config.output.dir.as_deref(),
                file,
                &reports_text(&reports, common.format)?,
            )?;
            Ok(status(reports.iter().any(CheckOutcome::failed)))
        }
        Command::Simulate {
            graph,
            support,
            u,
            seed,
            e0,
            e1,
            p0,
            p1,
            out,
        } => {
            let g = read_graph(&graph)?;
            let x = SparseVector::new(g.n_left(), support)?;
            let mut y = measure_model(&g, &x, Model::threshold(u)?)?;
            let noise = if p0.is_some() || p1.is_some() {
                NoiseSpec::Stochastic {
                    p0: p0.unwrap_or(0.0),
                    p1: p1.unwrap_or(0.0),
                    seed,
                }
            } else {
                NoiseSpec::Adversarial {
                    e0: e0.unwrap_or(0),
                    e1: e1.unwrap_or(0),
                    seed,
                }
            };
            y = apply_noise(&y, &noise)?.outcome;
            emit(out.as_deref(), "outcome.txt", &y.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decode {
            graph,
            outcome,
            decoder,
            noise_threshold,
            d,
            max_subsets,
            out,
        } => {
            let g = read_graph(&graph)?;
            let y: OutcomeVector = fs::read_to_string(&outcome)
                .with_context(|| format!("reading {}", outcome.display()))?
                .parse()?;
            let limits = max_subsets.map_or_else(Limits::default, |m| Limits::new(m as u128));
            let record =
                pipeline::decode_record(&g, &y, decoder.into(), noise_threshold, d, &limits)?;
            emit(
                out.as_deref(),
                "decode.json",
                &format!("{}\n", serde_json::to_string(&record)?),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(common) => {
            let config = common.load()?;
            let result = grouptest_cli::run_experiment(&config)?;
            if let Some(dir) = config.output.dir.as_deref() {
                result.write_to(dir)?;
            }
            match common.format {
                Format::Csv => print!("{}", result.results_csv()?),
                Format::Kv => print!("{}", result.reports_text()),
            }
            eprintln!(
                "{} checks, {} failed; {} trials, {} decoded exactly",
                result.reports.len(),
                result.failed_claims(),
                result.rows.len(),
                result.successes()
            );
            Ok(status(result.failed_claims() > 0))
        }
        Command::Sweep { config, out } => {
            let outcome = sweep_file(&config)?;
            emit(out.as_deref(), "sweep.csv", &outcome.csv()?)?;
            Ok(status(outcome.failed_claims > 0 || outcome.errors > 0))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
