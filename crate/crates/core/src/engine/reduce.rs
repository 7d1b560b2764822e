//! Summation of the `2^(n/2)` signed subset terms.
//!
//! Masks are grouped into fixed chunks of [`CHUNK_MASKS`] consecutive values.
//! Chunks are dealt to workers round-robin so every worker sees a similar mix
//! of cheap (small `|Z|`) and expensive (large `|Z|`) subsets.
//!
//! * [`ReductionMode::Deterministic`]: each chunk is summed in ascending mask
//!   order with compensation, then the chunk partials go through a fixed
//!   pairwise tree. The result does not depend on the thread count.
//! * [`ReductionMode::Fast`]: each worker keeps one compensated accumulator
//!   over all its chunks; worker totals are added in worker-index order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Masks per work chunk.
pub const CHUNK_MASKS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum ReductionMode {
    #[default]
    Deterministic,
    Fast,
}

impl ReductionMode {
    pub fn name(self) -> &'static str {
        match self {
            ReductionMode::Deterministic => "deterministic",
            ReductionMode::Fast => "fast",
        }
    }
}

impl fmt::Display for ReductionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReductionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(ReductionMode::Deterministic),
            "fast" => Ok(ReductionMode::Fast),
            other => Err(Error::OutOfRange(format!(
                "unknown reduction mode '{other}'"
            ))),
        }
    }
}

/// Compensated complex accumulator (Kahan–Babuška/Neumaier, per component).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

#[inline]
fn two_sum_step(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: Complex64) {
        two_sum_step(&mut self.sum.re, &mut self.comp.re, x.re);
        two_sum_step(&mut self.sum.im, &mut self.comp.im, x.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

/// Number of chunks covering masks `0..total`.
pub fn chunk_count(total: u64) -> u64 {
    total.div_ceil(CHUNK_MASKS)
}

/// Mask range of chunk `index` within `0..total`.
pub fn chunk_range(index: u64, total: u64) -> std::ops::Range<u64> {
    let start = index * CHUNK_MASKS;
    start..(start + CHUNK_MASKS).min(total)
}

/// Pairwise sum with split points fixed by the slice length alone.
pub fn tree_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        len => {
            let mid = len / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

/// Worker totals combined in index order.
pub fn ordered_sum(values: &[Complex64]) -> Complex64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Reduces a materialized term table (`terms[mask]`) exactly as the engine
/// would with `threads` workers. Mask 0 is skipped.
pub fn reduce_terms(terms: &[Complex64], mode: ReductionMode, threads: usize) -> Complex64 {
    let total = terms.len() as u64;
    let chunks = chunk_count(total);
    let chunk_value = |c: u64, acc: &mut CompensatedSum| {
        for mask in chunk_range(c, total) {
            if mask != 0 {
                acc.add(terms[mask as usize]);
            }
        }
    };
    match mode {
        ReductionMode::Deterministic => {
            let partials: Vec<Complex64> = (0..chunks)
                .map(|c| {
                    let mut acc = CompensatedSum::new();
                    chunk_value(c, &mut acc);
                    acc.value()
                })
                .collect();
            tree_sum(&partials)
        }
        ReductionMode::Fast => {
            let workers = (threads.max(1) as u64).min(chunks.max(1));
            let totals: Vec<Complex64> = (0..workers)
                .map(|w| {
                    let mut acc = CompensatedSum::new();
                    let mut c = w;
                    while c < chunks {
                        chunk_value(c, &mut acc);
                        c += workers;
                    }
                    acc.value()
                })
                .collect();
            ordered_sum(&totals)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn alternating_subset_signs_cancel() {
        for k in 1..12u32 {
            let terms: Vec<Complex64> = (0..1u64 << k)
                .map(|mask| {
                    if mask.count_ones() % 2 == 0 {
                        c(1.0)
                    } else {
                        c(-1.0)
                    }
                })
                .collect();
            // mask 0 is skipped by design, so add its +1 back
            for mode in [ReductionMode::Deterministic, ReductionMode::Fast] {
                assert_eq!(
                    reduce_terms(&terms, mode, 3) + c(1.0),
                    c(0.0),
                    "k={k} {mode}"
                );
            }
        }
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(c(1e16));
        for _ in 0..1000 {
            acc.add(c(1.0));
        }
        acc.add(c(-1e16));
        assert_eq!(acc.value(), c(1000.0));
    }

    #[test]
    fn deterministic_mode_ignores_thread_count() {
        let terms: Vec<Complex64> = (0..5000)
            .map(|i| Complex64::new((i as f64).sin() * 1e3, (i as f64).cos()))
            .collect();
        let one = reduce_terms(&terms, ReductionMode::Deterministic, 1);
        for t in [2, 3, 8, 64] {
            assert_eq!(
                reduce_terms(&terms, ReductionMode::Deterministic, t)
                    .re
                    .to_bits(),
                one.re.to_bits()
            );
        }
    }

    #[test]
    fn chunk_layout() {
        assert_eq!(chunk_count(0), 0);
        assert_eq!(chunk_count(1), 1);
        assert_eq!(chunk_count(CHUNK_MASKS + 1), 2);
        assert_eq!(
            chunk_range(1, CHUNK_MASKS + 1),
            CHUNK_MASKS..CHUNK_MASKS + 1
        );
    }

    #[test]
    fn tree_sum_small_cases() {
        assert_eq!(tree_sum(&[]), c(0.0));
        assert_eq!(tree_sum(&[c(1.0), c(2.0), c(3.0)]), c(6.0));
    }
}
