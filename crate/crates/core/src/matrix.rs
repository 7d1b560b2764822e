//! Dense complex matrices, symmetry enforcement and the pair constructions
//! used by the inclusion–exclusion engine.
//!
//! Vertices are labelled `0..n` and grouped into the pairs `(2i, 2i+1)` for
//! `i in 0..n/2`. A [`PairSubset`] selects some of those pairs.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance applied by [`SymmetryMode::Strict`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Dense row-major complex matrix of arbitrary shape.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus; zero for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{z:>10.4} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// How [`SymmetricMatrix::new`] treats asymmetric input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetryMode {
    /// Reject input whose asymmetry exceeds [`SYMMETRY_TOLERANCE`] relative
    /// to `max(1, max|A|)`; accepted input has its upper triangle mirrored.
    #[default]
    Strict,
    /// Replace the input by `(A + A^T) / 2`.
    Auto,
}

/// Square complex matrix with exactly equal mirrored entries.
///
/// Immutable once built, so it can be shared freely across worker threads.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix(ComplexMatrix);

impl SymmetricMatrix {
    /// Validates (strict) or symmetrizes (auto) a square matrix.
    pub fn new(raw: ComplexMatrix, mode: SymmetryMode) -> Result<Self> {
        if !raw.is_square() {
            return Err(Error::NonSquare {
                rows: raw.rows,
                cols: raw.cols,
            });
        }
        let n = raw.rows;
        let mut m = raw;
        match mode {
            SymmetryMode::Strict => {
                let mut deviation = 0.0f64;
                for i in 0..n {
                    for j in i + 1..n {
                        deviation = deviation.max((m[(i, j)] - m[(j, i)]).norm());
                    }
                }
                let tolerance = SYMMETRY_TOLERANCE * m.max_abs().max(1.0);
                if deviation > tolerance {
                    return Err(Error::AsymmetricInput {
                        deviation,
                        tolerance,
                    });
                }
                for i in 0..n {
                    for j in i + 1..n {
                        m[(j, i)] = m[(i, j)];
                    }
                }
            }
            SymmetryMode::Auto => {
                for i in 0..n {
                    for j in i + 1..n {
                        let mean = (m[(i, j)] + m[(j, i)]) * 0.5;
                        m[(i, j)] = mean;
                        m[(j, i)] = mean;
                    }
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds from the upper triangle (diagonal included) given by `f(i, j)`, `i <= j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let z = f(i, j);
                m[(i, j)] = z;
                m[(j, i)] = z;
            }
        }
        Self(m)
    }

    /// `[[0, W], [W^T, 0]]` for a square `W`; its hafnian is `per(W)`.
    pub fn bipartite(w: &ComplexMatrix) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::NonSquare {
                rows: w.rows,
                cols: w.cols,
            });
        }
        let m = w.rows;
        Ok(Self::from_upper(2 * m, |i, j| {
            if i < m && j >= m {
                w[(i, j - m)]
            } else {
                ZERO
            }
        }))
    }

    pub fn n(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(self.0.scale(factor))
    }

    /// Copy with the diagonal replaced by zeros.
    pub fn without_diagonal(&self) -> Self {
        let mut m = self.0.clone();
        for i in 0..self.n() {
            m[(i, i)] = ZERO;
        }
        Self(m)
    }

    /// Copy with the diagonal replaced by `diag`.
    pub fn with_diagonal(&self, diag: &[Complex64]) -> Result<Self> {
        if diag.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: diag.len(),
            });
        }
        let mut m = self.0.clone();
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(Self(m))
    }

    /// Exact symmetric principal submatrix on `indices` (ascending order kept as given).
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        Self(ComplexMatrix::from_fn(k, k, |i, j| {
            self.0[(indices[i], indices[j])]
        }))
    }
}

impl Index<(usize, usize)> for SymmetricMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symmetric{:?}", self.0)
    }
}

/// Subset `Z` of the vertex pairs `{(2i, 2i+1)}`; bit `i` selects pair `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairSubset(pub u64);

impl PairSubset {
    pub const EMPTY: PairSubset = PairSubset(0);

    /// All `pairs` pairs selected.
    pub fn full(pairs: usize) -> Self {
        assert!(pairs < 64, "at most 63 pairs are addressable");
        PairSubset((1u64 << pairs) - 1)
    }

    pub fn from_pairs(pairs: &[usize]) -> Self {
        PairSubset(pairs.iter().fold(0u64, |mask, &i| mask | (1 << i)))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, pair: usize) -> bool {
        pair < 64 && self.0 >> pair & 1 == 1
    }

    /// Selected pair indices in ascending order.
    pub fn pairs(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Vertex indices `2i, 2i+1` for every selected pair, ascending.
    pub fn vertices(self) -> impl Iterator<Item = usize> {
        self.pairs().flat_map(|i| [2 * i, 2 * i + 1])
    }
}

/// Diagonal of a pair submatrix, `v = diag(A^(Z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalVector(pub Vec<Complex64>);

impl DiagonalVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == ZERO)
    }
}

/// `X·A`: rows `2i` and `2i+1` exchanged for every pair.
pub fn pair_swap(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.rows.is_multiple_of(2) {
        return Err(Error::OddDimension(a.rows));
    }
    Ok(ComplexMatrix::from_fn(a.rows, a.cols, |i, j| a[(i ^ 1, j)]))
}

/// Square submatrix on the rows and columns of the pairs in `z`.
pub fn pair_submatrix(m: &ComplexMatrix, z: PairSubset) -> Result<ComplexMatrix> {
    let idx: Vec<usize> = z.vertices().collect();
    if let Some(&last) = idx.last() {
        if last >= m.rows || last >= m.cols {
            return Err(Error::DimensionMismatch(format!(
                "pair subset {:#b} addresses index {last} of a {}x{} matrix",
                z.0, m.rows, m.cols
            )));
        }
    }
    let k = idx.len();
    Ok(ComplexMatrix::from_fn(k, k, |i, j| m[(idx[i], idx[j])]))
}

/// Splits `A` into its diagonal and its zero-diagonal remainder.
pub fn split_diag_offdiag(a: &SymmetricMatrix) -> (DiagonalVector, SymmetricMatrix) {
    (DiagonalVector(a.diagonal()), a.without_diagonal())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn strict_accepts_symmetric_input_unchanged() {
        let raw = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = SymmetricMatrix::new(raw.clone(), SymmetryMode::Strict).unwrap();
        assert_eq!(s.matrix(), &raw);
    }

    #[test]
    fn auto_mode_averages_with_transpose() {
        let s =
            SymmetricMatrix::new(real(&[&[0.0, 1.0], &[0.0, 0.0]]), SymmetryMode::Auto).unwrap();
        assert_eq!(s.matrix(), &real(&[&[0.0, 0.5], &[0.5, 0.0]]));
    }

    #[test]
    fn strict_rejects_asymmetry_beyond_tolerance() {
        let err = SymmetricMatrix::new(real(&[&[0.0, 1.0], &[0.9, 0.0]]), SymmetryMode::Strict)
            .unwrap_err();
        assert!(matches!(err, Error::AsymmetricInput { .. }), "{err}");
    }

    #[test]
    fn strict_mirrors_upper_triangle_within_tolerance() {
        let raw = real(&[&[0.0, 1.0], &[1.0 + 1e-14, 0.0]]);
        let s = SymmetricMatrix::new(raw, SymmetryMode::Strict).unwrap();
        assert_eq!(s[(1, 0)], c(1.0));
    }

    #[test]
    fn non_square_is_rejected() {
        let raw = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            SymmetricMatrix::new(raw, SymmetryMode::Auto),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn empty_matrix_is_valid() {
        let s = SymmetricMatrix::new(ComplexMatrix::zeros(0, 0), SymmetryMode::Strict).unwrap();
        assert_eq!(s.n(), 0);
    }

    #[test]
    fn pair_swap_two_by_two() {
        let (a, b, cc) = (c(1.0), c(2.0), c(3.0));
        let m = ComplexMatrix::from_rows(&[[a, b], [b, cc]]).unwrap();
        let swapped = pair_swap(&m).unwrap();
        assert_eq!(
            swapped,
            ComplexMatrix::from_rows(&[[b, cc], [a, b]]).unwrap()
        );
    }

    #[test]
    fn pair_swap_permutes_rows_by_pairs() {
        let m = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                c(0.0)
            } else {
                c((4 * i + j) as f64)
            }
        });
        let s = pair_swap(&m).unwrap();
        for (src, dst) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            assert_eq!(s.row(dst), m.row(src));
        }
    }

    #[test]
    fn pair_swap_rejects_odd() {
        assert!(matches!(
            pair_swap(&ComplexMatrix::zeros(3, 3)),
            Err(Error::OddDimension(3))
        ));
    }

    #[test]
    fn pair_swap_matches_explicit_block_product() {
        let n = 6;
        let a = ComplexMatrix::from_fn(n, n, |i, j| {
            let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
            Complex64::new(0.3 * lo - 0.7 * hi + 0.1, (lo * hi).sin())
        });
        let x = ComplexMatrix::from_fn(n, n, |i, j| {
            if i / 2 == j / 2 && i != j {
                c(1.0)
            } else {
                c(0.0)
            }
        });
        assert_eq!(pair_swap(&a).unwrap(), x.matmul(&a).unwrap());
    }

    #[test]
    fn pair_submatrix_selections() {
        let m = ComplexMatrix::from_fn(6, 6, |i, j| c((10 * i + j) as f64));
        assert_eq!(pair_submatrix(&m, PairSubset::full(3)).unwrap(), m);
        assert_eq!(pair_submatrix(&m, PairSubset::EMPTY).unwrap().rows(), 0);

        let sub = pair_submatrix(&m, PairSubset::from_pairs(&[0, 2])).unwrap();
        let idx = [0usize, 1, 4, 5];
        let expected = ComplexMatrix::from_fn(4, 4, |i, j| m[(idx[i], idx[j])]);
        assert_eq!(sub, expected);
    }

    #[test]
    fn pair_submatrix_out_of_range() {
        let m = ComplexMatrix::zeros(4, 4);
        assert!(pair_submatrix(&m, PairSubset::from_pairs(&[2])).is_err());
    }

    #[test]
    fn split_examples() {
        let a =
            SymmetricMatrix::new(real(&[&[1.0, 5.0], &[5.0, 3.0]]), SymmetryMode::Strict).unwrap();
        let (v, off) = split_diag_offdiag(&a);
        assert_eq!(v.0, vec![c(1.0), c(3.0)]);
        assert_eq!(off.matrix(), &real(&[&[0.0, 5.0], &[5.0, 0.0]]));

        let d =
            SymmetricMatrix::new(real(&[&[1.0, 0.0], &[0.0, 2.0]]), SymmetryMode::Strict).unwrap();
        let (v, off) = split_diag_offdiag(&d);
        assert_eq!(v.0, vec![c(1.0), c(2.0)]);
        assert_eq!(off.matrix(), &ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn pair_subset_iteration() {
        let z = PairSubset::from_pairs(&[0, 3]);
        assert_eq!(z.len(), 2);
        assert_eq!(z.pairs().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(z.vertices().collect::<Vec<_>>(), vec![0, 1, 6, 7]);
        assert!(z.contains(3) && !z.contains(1));
    }
}
