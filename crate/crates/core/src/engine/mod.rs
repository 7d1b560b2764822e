//! Hafnian and loop hafnian by inclusion–exclusion over pair subsets.
//!
//! For an `n x n` matrix `A` with `D = n/2` pairs,
//!
//! ```text
//! haf(A) = sum_{Z ⊆ [D]} (-1)^{D-|Z|} [λ^D] exp( sum_{k=1..D} tr(B_Z^k) λ^k / 2k )
//! ```
//!
//! where `B_Z` is the pair-swapped matrix `X·A` restricted to the rows and
//! columns of the pairs in `Z`. The loop hafnian adds `v B_Z^{k-1} X v^T / 2`
//! to each `λ^k` coefficient, with `v` the diagonal of `A` on those rows.
//! Each subset costs `O(|Z|^3)` through the power traces, for
//! `O(n^3 2^(n/2))` overall.

mod reduce;
mod series;

use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;

pub use reduce::{
    chunk_count, chunk_range, ordered_sum, reduce_terms, tree_sum, CompensatedSum, ReductionMode,
    CHUNK_MASKS,
};
pub use series::{exp_coefficient, inner_series, TruncatedPolynomial};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DiagonalVector, PairSubset, SymmetricMatrix};
use crate::powertrace::{Backend, TraceScratch};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest supported number of vertex pairs (masks are `u64`).
pub const MAX_PAIRS: usize = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub backend: Backend,
    pub threads: usize,
    pub reduction: ReductionMode,
    /// Only consulted by [`evaluate`] and [`subset_term`].
    pub include_loops: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Spectral,
            threads: 1,
            reduction: ReductionMode::Deterministic,
            include_loops: false,
        }
    }
}

impl EngineOptions {
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_reduction(mut self, reduction: ReductionMode) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn with_loops(mut self, include_loops: bool) -> Self {
        self.include_loops = include_loops;
        self
    }
}

/// Result of a full evaluation together with the largest subset-term modulus,
/// the natural scale for judging cancellation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HafnianReport {
    pub value: Complex64,
    pub max_term_abs: f64,
    /// Number of subset terms evaluated (`2^(n/2) - 1`).
    pub terms: u64,
}

/// `haf(A)`; the diagonal of `A` is ignored.
pub fn hafnian(a: &SymmetricMatrix, opts: &EngineOptions) -> Result<Complex64> {
    run(a, opts, false).map(|r| r.value)
}

/// `lhaf(A)`; diagonal entries are loop weights.
pub fn loop_hafnian(a: &SymmetricMatrix, opts: &EngineOptions) -> Result<Complex64> {
    run(a, opts, true).map(|r| r.value)
}

/// Hafnian or loop hafnian according to `opts.include_loops`, with term statistics.
pub fn evaluate(a: &SymmetricMatrix, opts: &EngineOptions) -> Result<HafnianReport> {
    run(a, opts, opts.include_loops)
}

/// The signed inclusion–exclusion term of one pair subset.
///
/// The empty subset contributes zero whenever `n > 0`.
pub fn subset_term(a: &SymmetricMatrix, z: PairSubset, opts: &EngineOptions) -> Result<Complex64> {
    check_dimension(a.n())?;
    let pairs = a.n() / 2;
    if let Some(bad) = z.pairs().find(|&p| p >= pairs) {
        return Err(Error::DimensionMismatch(format!(
            "pair {bad} out of range for n = {}",
            a.n()
        )));
    }
    let mut stripped = None;
    let a = strip_unused_diagonal(a, opts.include_loops, &mut stripped);
    let mut eval = SubsetEvaluator::new(a, opts.include_loops, opts.backend);
    eval.term(z.mask())
}

/// `v B^{k-1} X v^T` for `k = 1..=count`, by repeated row-vector products.
///
/// Equivalently `v X (A^(Z) X)^{k-1} v^T`.
///
/// `b` is the pair-swapped submatrix `X·A^(Z)` and `v` the diagonal of `A^(Z)`.
pub fn loop_correction_vector(
    b: &ComplexMatrix,
    v: &DiagonalVector,
    count: usize,
) -> Result<Vec<Complex64>> {
    if !b.is_square() || b.rows() != v.len() || !v.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with a length-{} diagonal vector",
            b.rows(),
            b.cols(),
            v.len()
        )));
    }
    if count == 0 {
        return Err(Error::OutOfRange(
            "need at least one loop correction".into(),
        ));
    }
    let mut out = vec![ZERO; count];
    let mut w = Vec::new();
    let mut next = Vec::new();
    loop_terms_into(b.as_slice(), v.as_slice(), &mut w, &mut next, &mut out);
    Ok(out)
}

fn loop_terms_into(
    b: &[Complex64],
    v: &[Complex64],
    w: &mut Vec<Complex64>,
    next: &mut Vec<Complex64>,
    out: &mut [Complex64],
) {
    let size = v.len();
    w.clear();
    w.extend_from_slice(v);
    next.clear();
    next.resize(size, ZERO);
    let count = out.len();
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = w.iter().enumerate().map(|(j, x)| x * v[j ^ 1]).sum();
        if k + 1 == count {
            break;
        }
        next.fill(ZERO);
        for (i, &wi) in w.iter().enumerate() {
            if wi == ZERO {
                continue;
            }
            let row = &b[i * size..(i + 1) * size];
            for (dst, &bij) in next.iter_mut().zip(row) {
                *dst += wi * bij;
            }
        }
        std::mem::swap(w, next);
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    if n / 2 > MAX_PAIRS {
        return Err(Error::OutOfRange(format!(
            "n = {n} exceeds the supported maximum of {}",
            2 * MAX_PAIRS
        )));
    }
    Ok(())
}

/// Per-worker state: every buffer a subset evaluation needs, reused across masks.
struct SubsetEvaluator<'a> {
    a: &'a SymmetricMatrix,
    half: usize,
    loops: bool,
    backend: Backend,
    idx: Vec<usize>,
    sub: Vec<Complex64>,
    diag: Vec<Complex64>,
    traces: Vec<Complex64>,
    loop_terms: Vec<Complex64>,
    w: Vec<Complex64>,
    w_next: Vec<Complex64>,
    series: Vec<Complex64>,
    exp: Vec<Complex64>,
    scratch: TraceScratch,
}

impl<'a> SubsetEvaluator<'a> {
    fn new(a: &'a SymmetricMatrix, loops: bool, backend: Backend) -> Self {
        let n = a.n();
        let half = n / 2;
        // a zero diagonal makes every loop correction vanish exactly
        let loops = loops && a.diagonal().iter().any(|&d| d != ZERO);
        Self {
            a,
            half,
            loops,
            backend,
            idx: Vec::with_capacity(n),
            sub: Vec::with_capacity(n * n),
            diag: Vec::with_capacity(n),
            traces: vec![ZERO; half],
            loop_terms: vec![ZERO; half],
            w: Vec::with_capacity(n),
            w_next: Vec::with_capacity(n),
            series: vec![ZERO; half + 1],
            exp: Vec::with_capacity(half + 1),
            scratch: TraceScratch::with_capacity(n),
        }
    }

    fn fill_submatrix(&mut self) {
        let size = self.idx.len();
        let m = self.a.matrix();
        self.sub.clear();
        for &r in &self.idx {
            let row = m.row(r ^ 1);
            self.sub.extend(self.idx.iter().map(|&c| row[c]));
        }
        debug_assert_eq!(self.sub.len(), size * size);
    }

    fn term(&mut self, mask: u64) -> Result<Complex64> {
        if mask == 0 {
            return Ok(if self.half == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            });
        }
        self.idx.clear();
        self.idx.extend(PairSubset(mask).vertices());
        let size = self.idx.len();
        self.fill_submatrix();

        if self.loops {
            self.diag.clear();
            let m = self.a.matrix();
            self.diag.extend(self.idx.iter().map(|&i| m[(i, i)]));
            loop_terms_into(
                &self.sub,
                &self.diag,
                &mut self.w,
                &mut self.w_next,
                &mut self.loop_terms,
            );
        }

        let first =
            self.scratch
                .traces_in_place(self.backend, &mut self.sub, size, &mut self.traces);
        match first {
            Ok(()) => {}
            Err(Error::NoConvergence { .. }) if self.backend == Backend::Spectral => {
                self.fill_submatrix();
                self.scratch.traces_in_place(
                    Backend::CharPoly,
                    &mut self.sub,
                    size,
                    &mut self.traces,
                )?;
            }
            Err(e) => return Err(e),
        }

        let loops = self.loops.then_some(self.loop_terms.as_slice());
        series::fill_series(&self.traces, loops, &mut self.series);
        let coefficient = series::exp_top_coefficient(&self.series, &mut self.exp);
        let m = size / 2;
        Ok(if (self.half - m).is_multiple_of(2) {
            coefficient
        } else {
            -coefficient
        })
    }
}

struct WorkerOutput {
    /// `(chunk index, chunk partial)` in deterministic mode.
    partials: Vec<(u64, Complex64)>,
    /// Worker total in fast mode.
    total: Complex64,
    max_term_abs: f64,
}

fn run_worker(
    a: &SymmetricMatrix,
    loops: bool,
    opts: &EngineOptions,
    worker: u64,
    workers: u64,
    total_masks: u64,
    abort: &AtomicBool,
) -> Result<WorkerOutput> {
    let mut eval = SubsetEvaluator::new(a, loops, opts.backend);
    let chunks = chunk_count(total_masks);
    let mut out = WorkerOutput {
        partials: Vec::new(),
        total: ZERO,
        max_term_abs: 0.0,
    };
    let mut running = CompensatedSum::new();
    let mut chunk = worker;
    while chunk < chunks {
        if abort.load(Ordering::Relaxed) {
            break;
        }
        let mut local = CompensatedSum::new();
        for mask in chunk_range(chunk, total_masks) {
            if mask == 0 {
                continue;
            }
            let t = eval
                .term(mask)
                .inspect_err(|_| abort.store(true, Ordering::Relaxed))?;
            out.max_term_abs = out.max_term_abs.max(t.norm());
            match opts.reduction {
                ReductionMode::Deterministic => local.add(t),
                ReductionMode::Fast => running.add(t),
            }
        }
        if opts.reduction == ReductionMode::Deterministic {
            out.partials.push((chunk, local.value()));
        }
        chunk += workers;
    }
    out.total = running.value();
    Ok(out)
}

/// The hafnian ignores the diagonal; dropping it up front keeps it out of the
/// power traces, where it would only cancel up to rounding.
fn strip_unused_diagonal<'a>(
    a: &'a SymmetricMatrix,
    loops: bool,
    storage: &'a mut Option<SymmetricMatrix>,
) -> &'a SymmetricMatrix {
    if loops || a.diagonal().iter().all(|&d| d == ZERO) {
        a
    } else {
        storage.insert(a.without_diagonal())
    }
}

fn run(a: &SymmetricMatrix, opts: &EngineOptions, loops: bool) -> Result<HafnianReport> {
    let n = a.n();
    check_dimension(n)?;
    let mut stripped = None;
    let a = strip_unused_diagonal(a, loops, &mut stripped);
    if n == 0 {
        return Ok(HafnianReport {
            value: Complex64::new(1.0, 0.0),
            max_term_abs: 1.0,
            terms: 0,
        });
    }
    let total_masks = 1u64 << (n / 2);
    let chunks = chunk_count(total_masks);
    let workers = (opts.threads.max(1) as u64).min(chunks);
    let abort = AtomicBool::new(false);

    let outputs: Vec<WorkerOutput> = if workers == 1 {
        vec![run_worker(a, loops, opts, 0, 1, total_masks, &abort)?]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let abort = &abort;
                    scope.spawn(move || run_worker(a, loops, opts, w, workers, total_masks, abort))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("hafnian worker panicked"))
                .collect::<Result<Vec<_>>>()
        })?
    };

    let max_term_abs = outputs.iter().map(|o| o.max_term_abs).fold(0.0, f64::max);
    let value = match opts.reduction {
        ReductionMode::Deterministic => {
            let mut partials = vec![ZERO; chunks as usize];
            for o in &outputs {
                for &(c, v) in &o.partials {
                    partials[c as usize] = v;
                }
            }
            tree_sum(&partials)
        }
        ReductionMode::Fast => {
            let totals: Vec<Complex64> = outputs.iter().map(|o| o.total).collect();
            ordered_sum(&totals)
        }
    };
    Ok(HafnianReport {
        value,
        max_term_abs,
        terms: total_masks - 1,
    })
}
