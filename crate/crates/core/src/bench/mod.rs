//! Benchmark families with known hafnians, timing sweeps and scaling fits.

mod fit;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use fit::{fit_scaling, fit_scaling_points, median_times, parse_csv_times, ScalingFit};

use crate::engine::{evaluate, EngineOptions};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, SymmetricMatrix};
use crate::oracle::{double_factorial, factorial, telephone};

/// Name of the seeded generator behind [`Family::Random`].
pub const GENERATOR_NAME: &str = "ChaCha8Rng";

pub const CSV_HEADER: &str = "family,n,threads,backend,mode,repetition,wall_seconds,result_re,result_im,reference,percent_error_re,percent_error_abs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// All-ones off the diagonal, zero diagonal.
    Complete,
    /// All-ones including the diagonal; its loop hafnian counts matchings.
    CompleteLoops,
    /// `[[0, W], [W^T, 0]]` with all-ones `W`.
    Bipartite,
    /// Entries uniform in `[-1, 1] + i[-1, 1]`, then symmetrized.
    Random,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Complete,
        Family::CompleteLoops,
        Family::Bipartite,
        Family::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Complete => "complete",
            Family::CompleteLoops => "complete_loops",
            Family::Bipartite => "bipartite",
            Family::Random => "random",
        }
    }

    /// Whether the benchmark quantity is the loop hafnian.
    pub fn uses_loops(self) -> bool {
        self == Family::CompleteLoops
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::BadFamily(s.to_string()))
    }
}

/// Benchmark matrix of `family` at size `n`; `seed` only affects `Random`.
pub fn generate(family: Family, n: usize, seed: u64) -> Result<SymmetricMatrix> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Ok(match family {
        Family::Complete => SymmetricMatrix::from_upper(n, |i, j| if i == j { zero } else { one }),
        Family::CompleteLoops => SymmetricMatrix::from_upper(n, |_, _| one),
        Family::Bipartite => {
            SymmetricMatrix::bipartite(&ComplexMatrix::from_fn(n / 2, n / 2, |_, _| one))?
        }
        Family::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = ComplexMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
            });
            SymmetricMatrix::from_upper(n, |i, j| (m[(i, j)] + m[(j, i)]) * 0.5)
        }
    })
}

/// Exact value of the family's benchmark quantity: `(n-1)!!`, `T(n)` or `(n/2)!`.
pub fn reference_value(family: Family, n: usize) -> Option<BigUint> {
    match family {
        Family::Complete => Some(double_factorial(n as i64 - 1)),
        Family::CompleteLoops => Some(telephone(n as u64)),
        Family::Bipartite => Some(factorial(n as u64 / 2)),
        Family::Random => None,
    }
}

/// Relative error in percent, on the complex ratio `numerical / exact`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentError {
    /// `(Re(numerical / exact) - 1) * 100`, signed.
    pub re: f64,
    /// `|numerical / exact - 1| * 100`.
    pub abs: f64,
}

pub fn percent_error(numerical: Complex64, exact: Complex64) -> Result<PercentError> {
    if exact.norm() == 0.0 {
        return Err(Error::DivisionByZeroReference);
    }
    let ratio = numerical / exact;
    Ok(PercentError {
        re: (ratio.re - 1.0) * 100.0,
        abs: (ratio - 1.0).norm() * 100.0,
    })
}

fn biguint_to_complex(x: &BigUint) -> Complex64 {
    Complex64::new(x.to_f64().unwrap_or(f64::INFINITY), 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub family: Family,
    pub n: usize,
    pub threads: usize,
    pub backend: String,
    pub mode: String,
    pub repetition: usize,
    pub wall_seconds: f64,
    pub result: Complex64,
    pub reference: Option<BigUint>,
    /// Present exactly when `reference` is.
    pub percent_error: Option<PercentError>,
}

impl BenchmarkRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:e},{:e},{:e},{},{},{}",
            self.family,
            self.n,
            self.threads,
            self.backend,
            self.mode,
            self.repetition,
            self.wall_seconds,
            self.result.re,
            self.result.im,
            self.reference
                .as_ref()
                .map(|r| r.to_string())
                .unwrap_or_default(),
            opt(self.percent_error.map(|p| p.re)),
            opt(self.percent_error.map(|p| p.abs)),
        )
    }
}

/// Header plus one row per record.
pub fn to_csv(records: &[BenchmarkRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Times one evaluation of the family's quantity; generation is excluded.
pub fn run_point(
    family: Family,
    n: usize,
    seed: u64,
    opts: &EngineOptions,
    repetition: usize,
) -> Result<BenchmarkRecord> {
    let a = generate(family, n, seed)?;
    let opts = opts.with_loops(family.uses_loops());
    let start = Instant::now();
    let report = evaluate(&a, &opts)?;
    let wall = start.elapsed().as_secs_f64();
    let reference = reference_value(family, n);
    let percent_error = match &reference {
        Some(r) => Some(percent_error(report.value, biguint_to_complex(r))?),
        None => None,
    };
    Ok(BenchmarkRecord {
        family,
        n,
        threads: opts.threads,
        backend: opts.backend.name().to_string(),
        mode: opts.reduction.name().to_string(),
        repetition,
        wall_seconds: wall,
        result: report.value,
        reference,
        percent_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub family: Family,
    pub n_min: usize,
    pub n_max: usize,
    pub step: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub engine: EngineOptions,
    /// Total wall-clock budget; `None` means unbounded.
    pub budget: Option<Duration>,
}

impl SweepConfig {
    pub fn new(family: Family, n_min: usize, n_max: usize) -> Self {
        Self {
            family,
            n_min,
            n_max,
            step: 2,
            repetitions: 1,
            seed: 0,
            engine: EngineOptions::default(),
            budget: None,
        }
    }

    /// Sizes visited, in order.
    pub fn sizes(&self) -> Vec<usize> {
        (self.n_min..=self.n_max)
            .step_by(self.step.max(1))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<BenchmarkRecord>,
    /// Sizes dropped because the budget ran out; the records are still valid.
    pub skipped: Vec<usize>,
}

impl SweepOutcome {
    /// `BudgetExceeded` if any point was skipped.
    pub fn budget_error(&self, budget: Option<Duration>) -> Option<Error> {
        match (self.skipped.is_empty(), budget) {
            (false, Some(b)) => Some(Error::BudgetExceeded {
                budget_seconds: b.as_secs_f64(),
            }),
            _ => None,
        }
    }

    pub fn medians(&self) -> Vec<(usize, f64)> {
        median_times(&self.records)
    }
}

/// Runs the sweep sequentially. When a budget is set, a size is skipped
/// (along with every larger one) once its predicted cost, extrapolated from
/// the previous size as `n^3 2^(n/2)`, no longer fits in the remaining time.
pub fn sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    let sizes = config.sizes();
    for &n in &sizes {
        if n % 2 == 1 {
            return Err(Error::OddDimension(n));
        }
    }
    let start = Instant::now();
    let mut records = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (idx, &n) in sizes.iter().enumerate() {
        if let Some(budget) = config.budget {
            let remaining = budget.as_secs_f64() - start.elapsed().as_secs_f64();
            let predicted = last.map_or(0.0, |(m, t)| {
                let growth = (n as f64 / m as f64).powi(3) * 2f64.powf((n - m) as f64 / 2.0);
                t * growth * config.repetitions as f64
            });
            if remaining <= 0.0 || predicted > remaining {
                return Ok(SweepOutcome {
                    records,
                    skipped: sizes[idx..].to_vec(),
                });
            }
        }
        let mut times = Vec::with_capacity(config.repetitions);
        for rep in 0..config.repetitions.max(1) {
            let rec = run_point(config.family, n, config.seed, &config.engine, rep)?;
            times.push(rec.wall_seconds);
            records.push(rec);
        }
        last = Some((n, fit::median(&mut times)));
    }
    Ok(SweepOutcome {
        records,
        skipped: Vec::new(),
    })
}

/// Fixed `n`, one record set per thread count.
pub fn strong_scaling(
    family: Family,
    n: usize,
    threads: &[usize],
    engine: &EngineOptions,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<BenchmarkRecord>> {
    let mut records = Vec::new();
    for &t in threads {
        let opts = engine.with_threads(t);
        for rep in 0..repetitions.max(1) {
            records.push(run_point(family, n, seed, &opts, rep)?);
        }
    }
    Ok(records)
}

/// Steps `(n, threads)` to `(n + 2, 2 threads)` for `steps` points, keeping
/// the work per thread roughly constant.
pub fn weak_scaling(
    family: Family,
    n: usize,
    threads: usize,
    steps: usize,
    engine: &EngineOptions,
    seed: u64,
) -> Result<Vec<BenchmarkRecord>> {
    let mut records = Vec::with_capacity(steps);
    let (mut n, mut t) = (n, threads.max(1));
    for _ in 0..steps {
        records.push(run_point(family, n, seed, &engine.with_threads(t), 0)?);
        n += 2;
        t *= 2;
    }
    Ok(records)
}

/// Median wall time per thread count and the efficiency `T(1) / (p T(p))`
/// relative to the smallest thread count present.
pub fn parallel_efficiency(records: &[BenchmarkRecord]) -> Vec<(usize, f64, f64)> {
    let mut by_threads: Vec<(usize, Vec<f64>)> = Vec::new();
    for r in records {
        match by_threads.iter_mut().find(|(t, _)| *t == r.threads) {
            Some((_, v)) => v.push(r.wall_seconds),
            None => by_threads.push((r.threads, vec![r.wall_seconds])),
        }
    }
    by_threads.sort_by_key(|(t, _)| *t);
    let Some((base_threads, base_times)) = by_threads.first().cloned() else {
        return Vec::new();
    };
    let base = fit::median(&mut base_times.clone()) * base_threads as f64;
    by_threads
        .into_iter()
        .map(|(t, mut v)| {
            let m = fit::median(&mut v);
            (t, m, base / (t as f64 * m))
        })
        .collect()
}
