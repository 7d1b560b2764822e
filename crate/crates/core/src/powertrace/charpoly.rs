//! Characteristic polynomial of a Hessenberg matrix and power traces by
//! Newton's identities plus the Cayley–Hamilton trace recurrence.

use num_complex::Complex64;

use super::opcount;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Non-leading coefficients `c_0..c_{m-1}` of the monic polynomial
/// `x^m + sum_j c_j x^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolyCoeffs(pub Vec<Complex64>);

impl CharPolyCoeffs {
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Evaluates the monic polynomial at `x` by Horner's rule.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().rev().fold(ONE, |acc, &c| acc * x + c)
    }
}

/// `det(xI - H)` of an upper Hessenberg `H` by the leading-minor recurrence
/// `p_k = (x - h_kk) p_{k-1} - sum_{i<k} h_ik (prod_{j=i+1..k} h_{j,j-1}) p_{i-1}`.
pub fn hessenberg_charpoly(h: &[Complex64], n: usize) -> Result<CharPolyCoeffs> {
    debug_assert_eq!(h.len(), n * n);
    // polys[k] holds p_k in ascending order, length k+1 (monic)
    let mut polys: Vec<Vec<Complex64>> = Vec::with_capacity(n + 1);
    polys.push(vec![ONE]);
    for k in 1..=n {
        let mut next = vec![ZERO; k + 1];
        let prev = &polys[k - 1];
        let diag = h[(k - 1) * n + (k - 1)];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= diag * c;
        }
        let mut chain = ONE;
        for i in (1..k).rev() {
            chain *= h[i * n + i - 1];
            if chain == ZERO {
                break;
            }
            let weight = h[(i - 1) * n + (k - 1)] * chain;
            for (d, &c) in polys[i - 1].iter().enumerate() {
                next[d] -= weight * c;
            }
            opcount::add(i + 1);
        }
        opcount::add(2 * k);
        polys.push(next);
    }
    let mut top = polys.pop().expect("p_n present");
    top.pop();
    if let Some(bad) = top
        .iter()
        .position(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::DegenerateHessenberg(format!(
            "non-finite coefficient c_{bad} in degree-{n} characteristic polynomial"
        )));
    }
    Ok(CharPolyCoeffs(top))
}

/// Writes `tr(B^k)` for `k = 1..=out.len()` given the characteristic
/// polynomial of `B`.
pub fn traces_from_charpoly(poly: &CharPolyCoeffs, out: &mut [Complex64]) -> Result<()> {
    let m = poly.degree();
    // a_j is the coefficient of x^{m-j}
    let a = |j: usize| poly.0[m - j];
    let count = out.len();
    for k in 1..=count {
        let mut acc = ZERO;
        let span = m.min(k - 1);
        for j in 1..=span {
            acc += a(j) * out[k - j - 1];
        }
        if k <= m {
            acc += a(k) * k as f64;
        }
        out[k - 1] = -acc;
        opcount::add(span + 1);
    }
    if let Some(bad) = out
        .iter()
        .position(|t| !t.re.is_finite() || !t.im.is_finite())
    {
        return Err(Error::DegenerateHessenberg(format!(
            "trace recurrence produced a non-finite value at power {}",
            bad + 1
        )));
    }
    Ok(())
}
