use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::powertrace::PowerTraceVector;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polynomial in `λ` truncated at degree `D`; index `d` holds the `λ^d` coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPolynomial {
    coeffs: Vec<Complex64>,
}

impl TruncatedPolynomial {
    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![ZERO; degree + 1],
        }
    }

    /// Coefficients `c_0..c_D`; the degree is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a truncated polynomial has at least the constant term"
        );
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> Complex64 {
        self.coeffs[d]
    }

    /// Product with every term above the truncation degree discarded.
    pub fn mul_truncated(&self, other: &Self) -> Self {
        let d = self.degree().min(other.degree());
        let mut out = vec![ZERO; d + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(d + 1) {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(d + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }
}

/// Builds `s(λ) = sum_k (t_k / 2k + l_k / 2) λ^k`, `k = 1..=D`, with `s_0 = 0`.
///
/// `D` is the number of traces; `loop_terms`, when given, must have the same length.
pub fn inner_series(
    traces: &PowerTraceVector,
    loop_terms: Option<&[Complex64]>,
) -> Result<TruncatedPolynomial> {
    let d = traces.len();
    if let Some(l) = loop_terms {
        if l.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                found: l.len(),
            });
        }
    }
    let mut coeffs = vec![ZERO; d + 1];
    fill_series(traces.as_slice(), loop_terms, &mut coeffs);
    Ok(TruncatedPolynomial { coeffs })
}

#[inline]
pub(crate) fn fill_series(
    traces: &[Complex64],
    loop_terms: Option<&[Complex64]>,
    out: &mut [Complex64],
) {
    out[0] = ZERO;
    for k in 1..out.len() {
        let mut s = traces[k - 1] / (2 * k) as f64;
        if let Some(l) = loop_terms {
            s += l[k - 1] * 0.5;
        }
        out[k] = s;
    }
}

/// Coefficient of `λ^D` in `sum_{j=1..D} s^j / j!`, i.e. in `exp(s) - 1`.
///
/// Uses the series-exponential recurrence `k e_k = sum_{j=1..k} j s_j e_{k-j}`
/// (`O(D^2)`); `s_0` is ignored.
pub fn exp_coefficient(s: &TruncatedPolynomial) -> Complex64 {
    let mut scratch = Vec::with_capacity(s.coeffs.len());
    exp_top_coefficient(&s.coeffs, &mut scratch)
}

pub(crate) fn exp_top_coefficient(s: &[Complex64], e: &mut Vec<Complex64>) -> Complex64 {
    let d = s.len() - 1;
    if d == 0 {
        return ZERO;
    }
    e.clear();
    e.push(Complex64::new(1.0, 0.0));
    for k in 1..=d {
        let mut acc = ZERO;
        for j in 1..=k {
            acc += s[j] * e[k - j] * j as f64;
        }
        e.push(acc / k as f64);
    }
    e[d]
}
