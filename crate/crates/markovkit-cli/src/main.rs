//! Batch front end over the JSON/CSV file formats.
//!
//! Exit codes: 0 success (and condition satisfied, for checks); 2 input
//! or file error; 3 condition checked but not satisfied; 4 numerical
//! degeneracy or singular system. Diagnostics go to standard error;
//! results go to --out (atomically) or standard output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use markovkit::{io, Error};

#[derive(Parser)]
#[command(
    name = "markovkit",
    about = "Finite-state Markov kernel analysis",
    version,
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Output path; bare file names land in $MARKOVKIT_OUT_DIR if set.
    /// Omitted: standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ergodic decomposition of a kernel: classes, invariant measures,
    /// eigenfunctions, and the limit of the time-averaged kernel.
    Decompose {
        /// Kernel JSON file.
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Peripheral spectrum: unit eigenvalues as exact roots of unity,
    /// their projections, and the geometric residual.
    Spectrum {
        #[arg(long)]
        kernel: PathBuf,
        /// Eigenvalues within this distance of the unit circle count as
        /// peripheral; must lie in (0, 0.5).
        #[arg(long, default_value_t = 1e-8)]
        peripheral_tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Long-run distribution of an initial measure, with a time-averaged
    /// iteration cross-check printed to standard error.
    Limit {
        #[arg(long)]
        kernel: PathBuf,
        /// Initial measure JSON file.
        #[arg(long)]
        measure: PathBuf,
        /// Horizon for the iteration cross-check.
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Condition checks emitting a witness report.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Kernel induced on the product state space by a model file.
    Induce {
        /// Model JSON file.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Trace chain of a kernel on a subset of states.
    Trace {
        #[arg(long)]
        kernel: PathBuf,
        /// Comma-separated state labels to watch.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Seeded path simulation; emits estimate CSV, optionally the path.
    Simulate {
        #[arg(long)]
        kernel: PathBuf,
        /// Initial state label.
        #[arg(long)]
        start: String,
        /// Path length (states visited).
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Observable JSON file to average; defaults to the indicator of
        /// the start state.
        #[arg(long)]
        observable: Option<PathBuf>,
        /// Emit the visited states as CSV instead of the estimate row.
        #[arg(long)]
        dump_path: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Convergence profile of exact time averages toward the space
    /// average; emits CSV rows (n, deviation, n*deviation).
    Profile {
        #[arg(long)]
        kernel: PathBuf,
        /// Observable JSON file to average.
        #[arg(long)]
        observable: PathBuf,
        /// Initial state label.
        #[arg(long)]
        start: String,
        /// Comma-separated horizons.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        grid: Vec<u64>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// One-step minorization by a common measure: eps and the measure.
    Doeblin {
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Small-set recurrence: finite hitting times of the set plus a
    /// k-step minorization on it.
    Harris {
        #[arg(long)]
        kernel: PathBuf,
        /// Comma-separated labels of the candidate small set.
        #[arg(long, value_delimiter = ',', required = true)]
        small_set: Vec<String>,
        /// Largest k tried for the k-step minorization.
        #[arg(long, default_value_t = 16)]
        k_max: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Contraction witness around a center state at a fixed step count.
    Qscc {
        #[arg(long)]
        kernel: PathBuf,
        /// Center state label.
        #[arg(long)]
        center: String,
        /// Minorization weight in (0, 1].
        #[arg(long)]
        eps: f64,
        /// Step count of the witness.
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Ergodicity of a model: collapse witness search, decomposition,
    /// and small-set cross-check.
    Theorem2 {
        #[arg(long)]
        model: PathBuf,
        /// Largest law-iteration count searched; defaults to the number
        /// of product states.
        #[arg(long)]
        n_max: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Uniform integrability of a density family over a weighted grid.
    Ui {
        /// Density JSON file (rows plus cell weights).
        #[arg(long)]
        density: PathBuf,
        /// Comma-separated epsilon thresholds.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Resolves --out against MARKOVKIT_OUT_DIR for bare file names, then
/// writes atomically; without --out the content goes to standard output.
fn emit(out: &OutArg, content: &str) -> Result<(), Error> {
    match &out.out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let resolved = if path.components().count() == 1 {
                match std::env::var_os("MARKOVKIT_OUT_DIR") {
                    Some(dir) => PathBuf::from(dir).join(path),
                    None => path.clone(),
                }
            } else {
                path.clone()
            };
            io::atomic_write(&resolved, content)
        }
    }
}

/// Serializes a report, emits it, prints diagnostics, and converts the
/// verdict into the exit code.
fn finish_report(
    report: &markovkit::ConditionReport<f64>,
    out: &OutArg,
) -> Result<u8, Error> {
    emit(out, &io::to_json_string(&io::report_file(report))?)?;
    for d in &report.diagnostics {
        eprintln!("{}: {d}", report.condition.name());
    }
    Ok(if report.satisfied { 0 } else { 3 })
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Decompose { kernel, out } => {
            let k = io::parse_kernel(&read(&kernel)?)?;
            let d = markovkit::decompose(&k)?;
            emit(&out, &io::to_json_string(&io::decomposition_file(&d))?)?;
            Ok(0)
        }
        Command::Spectrum { kernel, peripheral_tol, out } => {
            let k = io::parse_kernel(&read(&kernel)?)?;
            let s = markovkit::compute_split(&k, peripheral_tol)?;
            emit(&out, &io::to_json_string(&io::split_file(&s))?)?;
            Ok(0)
        }
        Command::Limit { kernel, measure, n, out } => {
            let k = io::parse_kernel(&read(&kernel)?)?;
            let mu = io::parse_measure(&read(&measure)?)?;
            let d = markovkit::decompose(&k)?;
            let limit = d.limit_of_initial_measure(&mu)?;

            // Cross-check: time-average the measure directly for n steps
            // and report how far the iteration sits from the limit.
            let mut cur = mu;
            let mut acc = vec![0.0f64; k.size()];
            for i in 0..n {
                for (a, w) in acc.iter_mut().zip(cur.weights()) {
                    *a += w;
                }
                if i + 1 < n {
                    cur = k.apply_measure(&cur)?;
                }
            }
            let averaged = markovkit::SignedMeasure::new(
                k.space().clone(),
                acc.into_iter().map(|a| a / n as f64).collect(),
            )?;
            eprintln!(
                "limit: iteration cross-check at n={n}: variation distance {:e}",
                limit.variation_distance(&averaged)?
            );

            emit(&out, &io::to_json_string(&io::measure_file(&limit))?)?;
            Ok(0)
        }
        Command::Check(check) => match check {
            CheckCommand::Doeblin { kernel, out } => {
                let k = io::parse_kernel(&read(&kernel)?)?;
                finish_report(&markovkit::check_doeblin(&k), &out)
            }
            CheckCommand::Harris { kernel, small_set, k_max, out } => {
                let k = io::parse_kernel(&read(&kernel)?)?;
                finish_report(&markovkit::check_harris(&k, &small_set, k_max)?, &out)
            }
            CheckCommand::Qscc { kernel, center, eps, n, out } => {
                let k = io::parse_kernel(&read(&kernel)?)?;
                finish_report(&markovkit::check_qscc_witness(&k, &center, eps, n)?, &out)
            }
            CheckCommand::Theorem2 { model, n_max, out } => {
                let m = io::parse_model(&read(&model)?)?;
                let n_max = n_max.unwrap_or(m.state_space().size() as u64);
                let verdict = m.ergodicity_verdict(n_max)?;
                finish_report(&verdict.report, &out)
            }
            CheckCommand::Ui { density, eps_grid, out } => {
                let (rows, weights) = io::parse_density(&read(&density)?)?;
                let report =
                    markovkit::check_uniform_integrability(&rows, &weights, &eps_grid)?;
                finish_report(&report, &out)
            }
        },
        Command::Induce { model, out } => {
            let m = io::parse_model(&read(&model)?)?;
            emit(&out, &io::to_json_string(&io::kernel_file(&m.induce_kernel()))?)?;
            Ok(0)
        }
        Command::Trace { kernel, subset, out } => {
            let k = io::parse_kernel(&read(&kernel)?)?;
            let t = markovkit::trace_chain(&k, &subset)?;
            emit(&out, &io::to_json_string(&io::kernel_file(t.kernel()))?)?;
            Ok(0)
        }
        Command::Simulate { kernel, start, n, seed, observable, dump_path, out } => {
            let k = io::parse_kernel(&read(&kernel)?)?;
            let run = markovkit::simulate_path(&k, &start, n, seed)?;
            if dump_path {
                emit(&out, &io::path_csv(&run))?;
                return Ok(0);
            }
            let g = match observable {
                Some(path) => io::parse_observable(&read(&path)?)?,
                None => {
                    let idx = k.space().require(&start)?;
                    markovkit::Observable::indicator(k.space().clone(), &[idx])
                }
            };
            let (estimate, stderr) = run.empirical_stats(&g)?;
            emit(&out, &io::run_csv(&run, estimate, stderr))?;
            Ok(0)
        }
        Command::Profile { kernel, observable, start, grid, out } => {
            let k = io::parse_kernel(&read(&kernel)?)?;
            let g = io::parse_observable(&read(&observable)?)?;
            let p = markovkit::convergence_profile(&k, &g, &start, &grid)?;
            eprintln!(
                "profile: limit {:e}, fitted constant {:e}",
                p.limit, p.fitted_constant
            );
            emit(&out, &io::profile_csv(&p))?;
            Ok(0)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NumericalDegeneracy(_) | Error::SingularSystem(_) => 4,
        Error::SpaceMismatch(_)
        | Error::InvalidInput(_)
        | Error::NonStochasticRow { .. }
        | Error::NonReturning(_)
        | Error::AmbiguousLimit { .. }
        | Error::Parse(_)
        | Error::Io(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
