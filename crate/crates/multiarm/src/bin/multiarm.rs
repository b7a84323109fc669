//! Command-line front end: solve per-sample weights, evaluate
//! multi-armed groups, generate synthetic scenarios, and check the
//! domain-shift bound. Verbosity is controlled by the MULTIARM_LOG
//! environment variable.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multiarm::capacity::{decide, solve_weights, SolverConfig};
use multiarm::ingest::{load_manifest, load_scores, write_scores};
use multiarm::metrics::evaluate_group;
use multiarm::shift::{shift_bound, ShiftInstance};
use multiarm::synth::{generate_scenario, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "multiarm",
    about = "Minimax aggregation of attack detectors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SolverOpts {
    /// Convergence tolerance for the capacity iteration.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap for the capacity iteration.
    #[arg(long)]
    max_iters: Option<usize>,
}

impl SolverOpts {
    fn config(&self) -> Result<SolverConfig, multiarm::Error> {
        let mut config = SolverConfig::default();
        if let Some(tol) = self.tol {
            config.tol = tol;
        }
        if let Some(max_iters) = self.max_iters {
            config.max_iters = max_iters;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the per-record aggregation weights for a score table.
    Solve {
        #[arg(long)]
        scores: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverOpts,
        /// Decision threshold; adds a verdict column when set.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Evaluate every manifest group: AUROC and FPR at 95% TPR.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverOpts,
        /// Report metrics as percentages instead of fractions.
        #[arg(long)]
        percent: bool,
    },
    /// Generate a synthetic scenario score table from a spec.
    Simulate {
        /// ScenarioSpec JSON path.
        spec: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the domain-shift error bound on a finite instance.
    ShiftBound {
        /// ShiftInstance JSON path.
        instance: PathBuf,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_writer(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Solve {
            scores,
            out,
            solver,
            gamma,
        } => {
            let config = solver.config()?;
            if let Some(g) = gamma {
                if !(0.0..=1.0).contains(&g) {
                    return Err(format!("gamma {g} out of [0,1]").into());
                }
            }
            let table = load_scores(BufReader::new(File::open(&scores)?))?;
            log::info!(
                "solving {} records, K={}",
                table.records().len(),
                table.detectors().len()
            );
            let mut writer = csv::Writer::from_writer(out_writer(&out)?);
            let mut header = vec!["sample_id".to_string(), "source".to_string()];
            header.extend(table.detectors().iter().map(|d| format!("w_{d}")));
            header.extend([
                "capacity_nats".into(),
                "p_adversarial".into(),
                "converged".into(),
            ]);
            if gamma.is_some() {
                header.push("verdict".into());
            }
            writer.write_record(&header)?;
            for rec in table.records() {
                let bank = table.bank_for(&rec.sample_id, &rec.source)?;
                let result = solve_weights(&bank, &config);
                let mut row = vec![rec.sample_id.clone(), rec.source.clone()];
                row.extend(result.weights.as_slice().iter().map(|w| format!("{w:.12}")));
                row.push(format!("{:.12}", result.capacity_nats));
                row.push(format!("{:.12}", result.mixture.p_adversarial()));
                row.push(if result.converged {
                    "1".into()
                } else {
                    "0".into()
                });
                if let Some(g) = gamma {
                    row.push(decide(&result.mixture, g)?.to_string());
                }
                writer.write_record(&row)?;
            }
            writer.flush()?;
        }
        Command::Evaluate {
            scores,
            manifest,
            out,
            solver,
            percent,
        } => {
            let config = solver.config()?;
            let table = load_scores(BufReader::new(File::open(&scores)?))?;
            let manifest = load_manifest(BufReader::new(File::open(&manifest)?))?;
            let aggregator = |bank: &multiarm::capacity::DetectorBank| {
                solve_weights(bank, &config).mixture.p_adversarial()
            };
            let mut groups = manifest.groups.clone();
            groups.sort_by(|a, b| a.name.cmp(&b.name));
            let mut reports = Vec::new();
            for group in &groups {
                match evaluate_group(&table, &group.name, &group.attacks, aggregator) {
                    Ok(mut report) => {
                        if percent {
                            report.auroc *= 100.0;
                            report.fpr_at_95_tpr *= 100.0;
                        }
                        reports.push(report);
                    }
                    Err(multiarm::Error::Validation(msg)) => {
                        eprintln!("warning: skipping group '{}': {msg}", group.name);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let mut writer = out_writer(&out)?;
            serde_json::to_writer_pretty(&mut writer, &reports)?;
            writeln!(writer)?;
        }
        Command::Simulate { spec, out, seed } => {
            let mut spec: ScenarioSpec =
                serde_json::from_reader(BufReader::new(File::open(&spec)?))?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let table = generate_scenario(&spec)?;
            write_scores(&table, out_writer(&out)?)?;
        }
        Command::ShiftBound { instance, out } => {
            let instance: ShiftInstance =
                serde_json::from_reader(BufReader::new(File::open(&instance)?))?;
            let report = shift_bound(&instance)?;
            let mut writer = out_writer(&out)?;
            serde_json::to_writer_pretty(&mut writer, &report)?;
            writeln!(writer)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MULTIARM_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
