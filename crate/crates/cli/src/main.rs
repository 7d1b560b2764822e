use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use hafnium::bench::{self, Family, SweepConfig};
use hafnium::io::{self, MatrixFormat};
use hafnium::oracle;
use hafnium::{Backend, EngineOptions, Error, ReductionMode};

#[derive(Parser)]
#[command(
    name = "hafnium",
    version,
    about = "Exact hafnians of complex symmetric matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EngineArgs {
    #[arg(long, default_value = "spectral")]
    backend: Backend,
    #[arg(long, env = "HAFNIUM_THREADS", default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "deterministic")]
    mode: ReductionMode,
}

impl EngineArgs {
    fn options(&self) -> EngineOptions {
        EngineOptions::default()
            .with_backend(self.backend)
            .with_threads(self.threads)
            .with_reduction(self.mode)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Hafnian (or loop hafnian) of a matrix file.
    Compute {
        path: PathBuf,
        #[arg(long)]
        loops: bool,
        /// Input format; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<MatrixFormat>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Writes a benchmark-family matrix.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "text")]
        format: MatrixFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Timing sweep over n, emitted as CSV.
    Sweep {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        step: usize,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget_seconds: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Fits a n^b 2^(c n) to the median times of a sweep CSV.
    Fit {
        csv: PathBuf,
        /// Only sizes strictly above this are fitted.
        #[arg(long, default_value_t = 20)]
        threshold: usize,
    },
    /// Strong scaling over a thread list, or weak scaling with --weak-steps.
    Threads {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        thread_list: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        /// Step (n, threads) -> (n + 2, 2 threads) this many times from
        /// (--n, first entry of --thread-list).
        #[arg(long)]
        weak_steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Brute-force matching-sum value of a matrix file, for cross-checks.
    Oracle {
        path: PathBuf,
        #[arg(long)]
        loops: bool,
        #[arg(long)]
        format: Option<MatrixFormat>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::BadFamily(_) | Error::OutOfRange(_) | Error::Json(_) => 2,
        Error::NonSquare { .. }
        | Error::AsymmetricInput { .. }
        | Error::OddDimension(_)
        | Error::DimensionMismatch(_)
        | Error::LengthMismatch { .. }
        | Error::TooLarge { .. } => 3,
        Error::NoConvergence { .. }
        | Error::DegenerateHessenberg(_)
        | Error::CapacityExceeded { .. }
        | Error::InsufficientData { .. }
        | Error::DivisionByZeroReference => 4,
        Error::BudgetExceeded { .. } => 5,
        Error::Io(_) => 1,
    }
}

fn format_complex(z: Complex64) -> String {
    let im = if z.im == 0.0 {
        "0.0e0".to_string()
    } else {
        format!("{:.12e}", z.im.abs())
    };
    let sign = if z.im.is_sign_negative() && z.im != 0.0 {
        '-'
    } else {
        '+'
    };
    format!("{:.12e} {sign} {im} i", z.re)
}

fn resolve_format(path: &Path, format: Option<MatrixFormat>) -> MatrixFormat {
    format.unwrap_or_else(|| MatrixFormat::from_path(path))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Compute {
            path,
            loops,
            format,
            engine,
        } => {
            let a = io::read_matrix(&path, resolve_format(&path, format))?;
            let opts = engine.options().with_loops(loops);
            let start = Instant::now();
            let report = hafnium::evaluate(&a, &opts)?;
            let wall = start.elapsed().as_secs_f64();
            println!("{}", format_complex(report.value));
            println!("log10|result| = {:.6}", report.value.norm().log10());
            println!("wall_seconds = {wall:.6}");
            println!("backend = {}", opts.backend);
            println!("terms = {}", report.terms);
        }
        Command::Generate {
            family,
            n,
            seed,
            format,
            out,
        } => {
            let a = bench::generate(family, n, seed)?;
            let bytes = io::encode(a.matrix(), format);
            match out {
                Some(path) => std::fs::write(path, bytes)?,
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&bytes)?;
                }
            }
        }
        Command::Sweep {
            family,
            n_min,
            n_max,
            step,
            repetitions,
            seed,
            budget_seconds,
            out,
            engine,
        } => {
            let cfg = SweepConfig {
                family,
                n_min,
                n_max,
                step,
                repetitions,
                seed,
                engine: engine.options(),
                budget: budget_seconds.map(Duration::from_secs_f64),
            };
            eprintln!("# generator={} seed={seed}", bench::GENERATOR_NAME);
            let outcome = bench::sweep(&cfg)?;
            emit(out.as_deref(), &bench::to_csv(&outcome.records))?;
            for (n, t) in outcome.medians() {
                eprintln!("# median n={n} wall_seconds={t:e}");
            }
            if let Some(err) = outcome.budget_error(cfg.budget) {
                eprintln!("# skipped n={:?}", outcome.skipped);
                return Err(err);
            }
        }
        Command::Fit { csv, threshold } => {
            let text = std::fs::read_to_string(&csv)?;
            let fit = bench::fit_scaling_points(&bench::parse_csv_times(&text)?, threshold)?;
            println!("a = {:e}", fit.a);
            println!("b = {:.6}", fit.b);
            println!("c = {:.6}", fit.c);
            println!("residual = {:e}", fit.residual);
            println!("r_squared = {:.6}", fit.r_squared);
            println!("points = {}", fit.points);
        }
        Command::Threads {
            family,
            n,
            thread_list,
            repetitions,
            weak_steps,
            seed,
            out,
            engine,
        } => {
            let opts = engine.options();
            let records = match weak_steps {
                Some(steps) => {
                    let t0 = thread_list.first().copied().unwrap_or(1);
                    bench::weak_scaling(family, n, t0, steps, &opts, seed)?
                }
                None => bench::strong_scaling(family, n, &thread_list, &opts, repetitions, seed)?,
            };
            emit(out.as_deref(), &bench::to_csv(&records))?;
            if weak_steps.is_none() {
                for (t, wall, eff) in bench::parallel_efficiency(&records) {
                    eprintln!("# threads={t} median_wall_seconds={wall:e} efficiency={eff:.3}");
                }
            }
        }
        Command::Oracle {
            path,
            loops,
            format,
        } => {
            let a = io::read_matrix(&path, resolve_format(&path, format))?;
            let value = if loops {
                oracle::loop_hafnian_bruteforce(&a)?
            } else {
                oracle::hafnian_bruteforce(&a)?
            };
            println!("{}", format_complex(value));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
