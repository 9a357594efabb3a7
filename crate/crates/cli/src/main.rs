//! `jointmeas`: decide, quantify and certify incompatibility of quantum
//! measurements from the command line.
//!
//! Exit codes: 0 for a conclusive result, 2 for a boundary or otherwise
//! inconclusive one, 1 for invalid input.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;
mod report;
mod sweep;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use jointmeas_core::channel::depolarizing;
use jointmeas_core::entanglement::{bell_state, ghz_state};
use jointmeas_core::sdp::NoiseModel;
use jointmeas_core::{Error, QubitDichotomic, SolverConfig};

use report::{Exit, Format, Report};

#[derive(Parser, Debug)]
#[command(name = "jointmeas", version, about = "Decide, quantify and certify incompatibility of quantum measurements")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Width of the solver's final margin bracket.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    /// Seed for random sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Print the report as CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Iterations allowed for one feasibility probe.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
}

/// Observables from JSON files (each holding one observable or an array of
/// them) followed by `--qubit` shorthands, in that order.
#[derive(Args, Debug)]
struct Observables {
    files: Vec<PathBuf>,
    /// Two-outcome qubit observable with effects ((1 ± bias) 1 ± a·σ)/2.
    #[arg(long = "qubit", value_name = "BIAS,A1,A2,A3", value_parser = input::parse_qubit, allow_hyphen_values = true)]
    qubits: Vec<QubitDichotomic>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Noise {
    /// Mix with the uniform trivial observables.
    Uniform,
    /// Mix with the best trivial observables.
    Optimal,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every applicable criterion and print a verdict table.
    Check(Observables),
    /// Solve the joint-observable margin program.
    Margin(Observables),
    /// Largest mixing weight keeping a pair incompatible under noise.
    Robustness {
        #[command(flatten)]
        obs: Observables,
        #[arg(long, value_enum, default_value = "uniform")]
        noise: Noise,
        /// Width of the bisection bracket on the weight.
        #[arg(long, default_value_t = 1e-5)]
        precision: f64,
    },
    /// Evaluate the state-discrimination witness.
    Witness {
        #[command(flatten)]
        obs: Observables,
        /// State ensembles (JSON arrays of matrices) replacing the Pauli eigenstates.
        #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
        ensembles: Option<Vec<PathBuf>>,
    },
    /// Test whether a collection is incompatible while all proper subsets are compatible.
    Specker {
        #[command(flatten)]
        obs: Observables,
        /// Use the unbiased triplet with Bloch vectors t x, t y, t z.
        #[arg(long, value_name = "T")]
        triplet_t: Option<f64>,
    },
    /// Inspect a channel and the compatibility of the duals of given observables.
    Channel {
        #[command(flatten)]
        obs: Observables,
        /// Channel JSON file.
        #[arg(long, conflicts_with = "depolarizing")]
        channel: Option<PathBuf>,
        /// Depolarizing channel with weight T on the identity.
        #[arg(long, value_name = "T")]
        depolarizing: Option<f64>,
        /// Dimension of the depolarizing channel.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Partial-transpose and marginal checks on a state.
    Entanglement {
        /// State JSON file (a matrix).
        #[arg(conflicts_with_all = ["bell", "ghz"])]
        state: Option<PathBuf>,
        #[arg(long, conflicts_with = "ghz")]
        bell: bool,
        #[arg(long)]
        ghz: bool,
        /// Bipartition as A,B.
        #[arg(long, value_parser = input::parse_dims)]
        dims: Option<(usize, usize)>,
    },
    /// Compare the criteria on seeded random pairs and emit CSV.
    Sweep {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_enum, default_value = "qubit")]
        family: sweep::Family,
        /// Dimension for the general family.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Outcome counts A,B for the general family.
        #[arg(long, value_parser = input::parse_dims, default_value = "2,2")]
        outcomes: (usize, usize),
        /// Write the table here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

impl Observables {
    fn load(&self) -> Result<Vec<jointmeas_core::Observable>> {
        input::load_observables(&self.files, &self.qubits)
    }
}

fn solver_config(g: &Global) -> Result<SolverConfig> {
    if !(g.tol > 0.0) {
        bail!("--tol must be positive");
    }
    let mut cfg = SolverConfig {
        tol: g.tol,
        ..SolverConfig::default()
    };
    if let Some(m) = g.max_iter {
        if m == 0 {
            bail!("--max-iter must be positive");
        }
        cfg.max_iter = m;
        cfg.max_total_iter = cfg.max_total_iter.max(m);
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Exit> {
    let g = &cli.global;
    let cfg = solver_config(g)?;
    let format = if g.json {
        Format::Json
    } else if g.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let report: Report = match &cli.command {
        Command::Check(obs) => commands::check(&obs.load()?, &cfg)?,
        Command::Margin(obs) => commands::margin(&obs.load()?, &cfg)?,
        Command::Robustness { obs, noise, precision } => {
            if !(*precision > 0.0) {
                bail!("--precision must be positive");
            }
            let model = match noise {
                Noise::Uniform => NoiseModel::UniformTrivial,
                Noise::Optimal => NoiseModel::OptimalTrivial,
            };
            commands::robustness(&obs.load()?, model, *precision, &cfg)?
        }
        Command::Witness { obs, ensembles } => {
            let ens = match ensembles.as_deref() {
                Some([a, b]) => Some((input::ensemble_from_file(a)?, input::ensemble_from_file(b)?)),
                _ => None,
            };
            commands::witness(&obs.load()?, ens)?
        }
        Command::Specker { obs, triplet_t } => {
            let mut list = obs.load()?;
            if let Some(t) = triplet_t {
                if !list.is_empty() {
                    bail!("--triplet-t replaces the observable arguments");
                }
                list = commands::triplet(*t)?;
            }
            commands::specker(&list, &cfg)?
        }
        Command::Channel {
            obs,
            channel,
            depolarizing: dep,
            dim,
        } => {
            let ch = match (channel, dep) {
                (Some(path), _) => input::channel_from_file(path)?,
                (None, Some(t)) => depolarizing(*t, *dim)?,
                (None, None) => bail!("give --channel FILE or --depolarizing T"),
            };
            commands::channel(&ch, &obs.load()?, &cfg)?
        }
        Command::Entanglement { state, bell, ghz, dims } => {
            let rho = match (state, bell, ghz) {
                (Some(path), _, _) => input::state_from_file(path)?,
                (None, true, _) => bell_state(),
                (None, _, true) => ghz_state(),
                _ => bail!("give a state file, --bell or --ghz"),
            };
            commands::entanglement(&rho, *dims)?
        }
        Command::Sweep {
            n,
            family,
            dim,
            outcomes,
            output,
        } => {
            let params = sweep::SweepParams {
                n: *n,
                family: *family,
                dim: *dim,
                outcomes: *outcomes,
                seed: g.seed,
            };
            let rows = sweep::run(&params, &cfg)?;
            let text = if format == Format::Json {
                serde_json::to_string_pretty(&sweep::to_json(&rows))? + "\n"
            } else {
                sweep::table(&rows).to_csv()
            };
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
            eprintln!(
                "{n} pairs: commuting {}, jordan holds {}, analytic compatible {}, sdp compatible {}, witness violated {}",
                sweep::count(&rows, "commute", "commuting"),
                sweep::count(&rows, "jordan", "holds"),
                sweep::count(&rows, "analytic", "compatible"),
                sweep::count(&rows, "sdp", "compatible"),
                sweep::count(&rows, "witness", "violated"),
            );
            return Ok(if sweep::count(&rows, "sdp", "inconclusive") > 0 {
                Exit::Inconclusive
            } else {
                Exit::Conclusive
            });
        }
    };
    std::io::stdout().write_all(report.render(format).as_bytes())?;
    Ok(report.exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(exit) => ExitCode::from(exit.code()),
        Err(e) => {
            // a solver that cannot settle the question is an inconclusive result
            if let Some(Error::NoConvergence(msg)) = e.downcast_ref::<Error>() {
                eprintln!("inconclusive: solver did not converge: {msg}");
                return ExitCode::from(2);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
