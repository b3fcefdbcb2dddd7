use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use psdda::harness::config::{DeltaChoice, StepKind};
use psdda::harness::experiment::{compare_baselines, delay_sweep, run_experiment, write_table};
use psdda::harness::metrics::CurveTable;
use psdda::harness::report::{constants_report, DEFAULT_HORIZONS};
use psdda::harness::{verify, Preset, RunConfig};
use psdda::{Error, Result};

#[derive(Parser)]
#[command(
    name = "psdda",
    version,
    about = "Push-sum dual averaging over delayed time-varying digraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run PS-DDA and write per-node metrics as CSV.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Print the summary block only.
        #[arg(long)]
        quiet: bool,
    },
    /// Validate the configured instance.
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        json: bool,
    },
    /// Print the convergence constants for m, B and tau_max.
    Constants {
        #[arg(long, short = 'm')]
        nodes: usize,
        #[arg(long, short = 'B')]
        window: usize,
        #[arg(long)]
        tau_max: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        lipschitz: f64,
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<usize>>,
        #[arg(long)]
        json: bool,
    },
    /// PS-DDA against the DDA baselines, or a sweep over uniform delays.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        /// Compare uniform delays instead of algorithms.
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Basic,
    Optimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaArg {
    Provable,
    Empirical,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short = 'T')]
    iterations: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Uniform delay on every edge.
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long, value_enum)]
    step: Option<StepArg>,
    #[arg(long)]
    step_scale: Option<f64>,
    #[arg(long, value_enum)]
    delta: Option<DeltaArg>,
    /// CSV destination; stdout when absent.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        let mut flags = RunConfig {
            preset: self.preset,
            seed: self.seed,
            iterations: self.iterations,
            stride: self.stride,
            output: self.output.clone(),
            ..Default::default()
        };
        flags.delay.uniform = self.tau;
        flags.step.kind = self.step.map(|s| match s {
            StepArg::Basic => StepKind::Basic,
            StepArg::Optimal => StepKind::Optimal,
        });
        flags.step.scale = self.step_scale;
        flags.step.delta = self.delta.map(|d| match d {
            DeltaArg::Provable => DeltaChoice::Provable,
            DeltaArg::Empirical => DeltaChoice::Empirical,
        });
        let merged = flags.over(file);
        if merged.preset.is_none() && merged.graph.schedule.is_none() {
            return Err(Error::Config(
                "give --preset or a --config with a graph schedule".into(),
            ));
        }
        Ok(merged)
    }
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, quiet } => {
            let exp = config.load()?.resolve()?;
            let out = run_experiment(&exp)?;
            match (&exp.output, quiet) {
                (Some(path), _) => {
                    write_table(&out.table, path)?;
                    for line in out.table.summary.comment_lines() {
                        eprintln!("{line}");
                    }
                }
                (None, true) => {
                    for line in out.table.summary.comment_lines() {
                        println!("{line}");
                    }
                }
                (None, false) => out.table.write_csv(sink(None)?)?,
            }
        }
        Command::Verify { config, json } => {
            let report = verify(&config.load()?);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?
                );
            } else {
                print!("{}", report.render());
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Constants {
            nodes,
            window,
            tau_max,
            radius,
            lipschitz,
            horizons,
            json,
        } => {
            let horizons = horizons.unwrap_or_else(|| DEFAULT_HORIZONS.to_vec());
            let report = constants_report(nodes, window, tau_max, radius, lipschitz, &horizons)?;
            if json {
                println!("{}", report.to_json()?);
            } else {
                print!("{}", report.to_text());
            }
        }
        Command::Compare { config, taus } => {
            let exp = config.load()?.resolve()?;
            let (table, comments): (CurveTable, Vec<String>) = match taus {
                Some(taus) => (
                    delay_sweep(&exp, &taus)?,
                    vec!["max f_err across nodes, PS-DDA per uniform delay".into()],
                ),
                None => (
                    compare_baselines(&exp)?,
                    vec![
                        "max f_err across nodes; the doubly stochastic baseline is simplified (lazy Metropolis on the symmetrized union graph)".into(),
                    ],
                ),
            };
            let mut comments = comments;
            comments.push("synthetic data and initial points, untuned step scale; curves show trends only".into());
            let finals = table
                .labels
                .iter()
                .zip(table.finals())
                .map(|(l, v)| format!("{l}={v:e}"))
                .collect::<Vec<_>>()
                .join(" ");
            comments.push(format!("final: {finals}"));
            table.write_csv(&comments, sink(exp.output.as_ref())?)?;
            if exp.output.is_some() {
                eprintln!("# final: {finals}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
