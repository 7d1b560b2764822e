//! Power traces `tr(B^k)`, `k = 1..K`, of general complex square matrices.
//!
//! Two interchangeable backends share the same Hessenberg reduction:
//!
//! * [`Backend::Spectral`] triangularizes by shifted QR and sums powers of
//!   the eigenvalues. This is the default.
//! * [`Backend::CharPoly`] builds the characteristic polynomial from the
//!   Hessenberg leading minors, seeds the first traces with Newton's
//!   identities and extends them with the Cayley–Hamilton recurrence.
//!
//! Both run in `O(size^3 + K * size)` scalar operations.

mod charpoly;
mod hessenberg;
mod spectral;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

pub use charpoly::{hessenberg_charpoly, traces_from_charpoly, CharPolyCoeffs};
pub use hessenberg::reduce_to_hessenberg;
pub use spectral::{hessenberg_eigenvalues, DEFLATION_TOLERANCE, SWEEPS_PER_ROW};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub(crate) fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}


#[cfg(not(test))]
pub(crate) mod opcount {
    #[inline(always)]
    pub fn add(_: usize) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Backend {
    #[default]
    Spectral,
    CharPoly,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Spectral => "spectral",
            Backend::CharPoly => "charpoly",
        }
    }

    pub fn other(self) -> Backend {
        match self {
            Backend::Spectral => Backend::CharPoly,
            Backend::CharPoly => Backend::Spectral,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" | "schur" => Ok(Backend::Spectral),
            "charpoly" => Ok(Backend::CharPoly),
            other => Err(Error::OutOfRange(format!(
                "unknown power-trace backend '{other}'"
            ))),
        }
    }
}

/// `tr(B^k)` for `k = 1..=K`; index `k - 1` holds power `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTraceVector(pub Vec<Complex64>);

impl PowerTraceVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `tr(B^k)`, 1-based.
    pub fn power(&self, k: usize) -> Complex64 {
        self.0[k - 1]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

/// Reusable buffers for repeated power-trace evaluations on matrices of
/// size at most `capacity`.
#[derive(Debug, Clone, Default)]
pub struct TraceScratch {
    eig: Vec<Complex64>,
    pow: Vec<Complex64>,
}

impl TraceScratch {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            eig: Vec::with_capacity(capacity),
            pow: Vec::with_capacity(capacity),
        }
    }

    /// Computes `tr(B^k)` for `k = 1..=out.len()` of the row-major `size x size`
    /// matrix in `b`, which is overwritten.
    pub fn traces_in_place(
        &mut self,
        backend: Backend,
        b: &mut [Complex64],
        size: usize,
        out: &mut [Complex64],
    ) -> Result<()> {
        if b.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "buffer of {} entries for a {size}x{size} matrix",
                b.len()
            )));
        }
        if size == 0 {
            out.fill(ZERO);
            return Ok(());
        }
        reduce_to_hessenberg(b, size);
        match backend {
            Backend::Spectral => {
                self.eig.clear();
                self.eig.resize(size, ZERO);
                hessenberg_eigenvalues(b, size, &mut self.eig)?;
                self.pow.clear();
                self.pow.extend_from_slice(&self.eig);
                for t in out.iter_mut() {
                    *t = self.pow.iter().sum();
                    for (p, &l) in self.pow.iter_mut().zip(&self.eig) {
                        *p *= l;
                    }
                }
                opcount::add(out.len() * size);
                Ok(())
            }
            Backend::CharPoly => {
                let poly = hessenberg_charpoly(b, size)?;
                traces_from_charpoly(&poly, out)
            }
        }
    }
}

fn check_square(b: &ComplexMatrix) -> Result<()> {
    if b.is_square() {
        Ok(())
    } else {
        Err(Error::NonSquare {
            rows: b.rows(),
            cols: b.cols(),
        })
    }
}

/// Power traces with the chosen backend.
pub fn power_traces(b: &ComplexMatrix, k: usize, backend: Backend) -> Result<PowerTraceVector> {
    check_square(b)?;
    if k == 0 {
        return Err(Error::OutOfRange(
            "number of power traces must be at least 1".into(),
        ));
    }
    let n = b.rows();
    let mut work = b.as_slice().to_vec();
    let mut out = vec![ZERO; k];
    TraceScratch::with_capacity(n).traces_in_place(backend, &mut work, n, &mut out)?;
    Ok(PowerTraceVector(out))
}

/// `tr(B^k) = sum_i lambda_i^k` over the eigenvalues from a Schur-type triangularization.
pub fn power_traces_spectral(b: &ComplexMatrix, k: usize) -> Result<PowerTraceVector> {
    power_traces(b, k, Backend::Spectral)
}

/// Power traces from the characteristic polynomial (no eigensolver).
pub fn power_traces_charpoly(b: &ComplexMatrix, k: usize) -> Result<PowerTraceVector> {
    power_traces(b, k, Backend::CharPoly)
}

/// All eigenvalues of `b`, in no particular order.
pub fn eigenvalues(b: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_square(b)?;
    let n = b.rows();
    let mut work = b.as_slice().to_vec();
    reduce_to_hessenberg(&mut work, n);
    let mut eig = vec![ZERO; n];
    hessenberg_eigenvalues(&mut work, n, &mut eig)?;
    Ok(eig)
}

/// Monic characteristic polynomial `det(xI - B)`.
pub fn characteristic_polynomial(b: &ComplexMatrix) -> Result<CharPolyCoeffs> {
    check_square(b)?;
    let n = b.rows();
    let mut work = b.as_slice().to_vec();
    reduce_to_hessenberg(&mut work, n);
    hessenberg_charpoly(&work, n)
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn close(a: &[Complex64], b: &[Complex64], rel: f64, abs: f64) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).norm() <= abs.max(rel * x.norm().max(y.norm())))
    }

    #[test]
    fn diagonal_examples() {
        let d = ComplexMatrix::from_real_rows(&[[2.0, 0.0], [0.0, 3.0]]).unwrap();
        assert_eq!(
            power_traces_spectral(&d, 2).unwrap().0,
            vec![c(5.0), c(13.0)]
        );
        assert_eq!(
            power_traces_charpoly(&d, 4).unwrap().0,
            vec![c(5.0), c(13.0), c(35.0), c(97.0)]
        );
    }

    #[test]
    fn nilpotent_and_zero_matrices() {
        let nil = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(power_traces_spectral(&nil, 3).unwrap().0, vec![c(0.0); 3]);
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(power_traces_charpoly(&z, 3).unwrap().0, vec![c(0.0); 3]);
        assert_eq!(power_traces_spectral(&z, 3).unwrap().0, vec![c(0.0); 3]);
    }

    #[test]
    fn empty_matrix_has_zero_traces() {
        let e = ComplexMatrix::zeros(0, 0);
        for backend in [Backend::Spectral, Backend::CharPoly] {
            assert_eq!(power_traces(&e, 2, backend).unwrap().0, vec![c(0.0); 2]);
        }
    }

    #[test]
    fn rejects_non_square_and_zero_k() {
        assert!(matches!(
            power_traces_spectral(&ComplexMatrix::zeros(2, 3), 1),
            Err(Error::NonSquare { .. })
        ));
        assert!(power_traces_spectral(&ComplexMatrix::identity(2), 0).is_err());
    }

    #[test]
    fn spectral_matches_explicit_powers() {
        let b = random_matrix(5, 5);
        let want: Vec<Complex64> = (1..=5).map(|k| trace_of_power(&b, k)).collect();
        let got = power_traces_spectral(&b, 5).unwrap();
        assert!(close(&got.0, &want, 1e-10, 1e-12), "{got:?} vs {want:?}");
    }

    #[test]
    fn charpoly_matches_spectral_on_random_input() {
        let b = random_matrix(6, 6);
        let s = power_traces_spectral(&b, 6).unwrap();
        let p = power_traces_charpoly(&b, 6).unwrap();
        assert!(close(&s.0, &p.0, 1e-8, 1e-10));
    }

    #[test]
    fn first_trace_is_the_diagonal_sum() {
        for n in 1..10 {
            let b = random_matrix(n, 40 + n as u64);
            let direct = b.trace();
            for backend in [Backend::Spectral, Backend::CharPoly] {
                let t1 = power_traces(&b, 1, backend).unwrap().power(1);
                let tol = 1e-12 * (1.0 + b.max_abs() * n as f64);
                assert!((t1 - direct).norm() <= tol, "{backend} n={n}");
            }
        }
    }

    #[test]
    fn backends_agree_on_seeded_random_matrices() {
        for trial in 0..200u64 {
            let n = 1 + (trial % 12) as usize;
            let b = random_matrix(n, 1000 + trial);
            let s = power_traces_spectral(&b, n).unwrap();
            let p = power_traces_charpoly(&b, n).unwrap();
            assert!(close(&s.0, &p.0, 1e-8, 1e-10), "trial {trial} n={n}");
        }
    }

    #[test]
    fn traces_are_similarity_invariant() {
        let n = 6;
        let b = random_matrix(n, 7);
        // well-conditioned P = I + 0.1 R, inverse via Neumann-free Gauss-Jordan oracle
        let r = random_matrix(n, 8);
        let p = ComplexMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { c(1.0) } else { c(0.0) } + r[(i, j)] * 0.1,
        );
        let p_inv = invert(&p);
        let similar = p.matmul(&b).unwrap().matmul(&p_inv).unwrap();
        let a = power_traces_spectral(&b, n).unwrap();
        let s = power_traces_spectral(&similar, n).unwrap();
        assert!(close(&a.0, &s.0, 1e-6, 1e-9));
    }

    fn invert(m: &ComplexMatrix) -> ComplexMatrix {
        let n = m.rows();
        let mut a = m.clone();
        let mut inv = ComplexMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().partial_cmp(&a[(y, col)].norm()).unwrap())
                .unwrap();
            for j in 0..n {
                let (t1, t2) = (a[(col, j)], a[(piv, j)]);
                a[(col, j)] = t2;
                a[(piv, j)] = t1;
                let (t1, t2) = (inv[(col, j)], inv[(piv, j)]);
                inv[(col, j)] = t2;
                inv[(piv, j)] = t1;
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for i in 0..n {
                if i != col {
                    let f = a[(i, col)];
                    for j in 0..n {
                        let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                        a[(i, j)] -= f * ac;
                        inv[(i, j)] -= f * ic;
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn pair_relabeling_leaves_swapped_traces_unchanged() {
        use crate::matrix::{pair_swap, SymmetricMatrix};
        let n = 6;
        let base = random_matrix(n, 21);
        let a = SymmetricMatrix::from_upper(n, |i, j| base[(i, j)]);
        // permute pairs (0,1,2) -> (2,0,1), keeping the within-pair order
        let perm = [4usize, 5, 0, 1, 2, 3];
        let relabeled = SymmetricMatrix::from_upper(n, |i, j| a[(perm[i], perm[j])]);
        let t1 = power_traces_spectral(&pair_swap(a.matrix()).unwrap(), 3).unwrap();
        let t2 = power_traces_spectral(&pair_swap(relabeled.matrix()).unwrap(), 3).unwrap();
        assert!(close(&t1.0, &t2.0, 1e-12, 1e-12));
    }

    #[test]
    fn operation_count_is_cubic() {
        for backend in [Backend::Spectral, Backend::CharPoly] {
            let mut worst = 0.0f64;
            for size in [4usize, 8, 16, 24, 32] {
                let b = random_matrix(size, 500 + size as u64);
                let k = size;
                opcount::take();
                power_traces(&b, k, backend).unwrap();
                let ops = opcount::take() as f64;
                let bound = (size * size * size) as f64 + (k * size) as f64;
                worst = worst.max(ops / bound);
            }
            // fixed alpha covering Hessenberg reduction plus ~O(size) QR sweeps
            assert!(
                worst < 40.0,
                "{backend}: ops / (size^3 + K size) reached {worst}"
            );
        }
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [Backend::Spectral, Backend::CharPoly] {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
    }
}
