//! Eigenvalues of a complex upper Hessenberg matrix by single-shift implicit
//! QR iteration with Wilkinson shifts.

use num_complex::Complex64;

use super::{cabs1, opcount};
use crate::error::{Error, Result};

/// Relative size below which a subdiagonal entry is treated as zero.
pub const DEFLATION_TOLERANCE: f64 = 1e-14;

/// QR sweeps allowed per unit of matrix size.
pub const SWEEPS_PER_ROW: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Computes all eigenvalues of the Hessenberg matrix `h` (destroyed) into `eig`.
pub fn hessenberg_eigenvalues(h: &mut [Complex64], n: usize, eig: &mut [Complex64]) -> Result<()> {
    debug_assert_eq!(h.len(), n * n);
    debug_assert!(eig.len() >= n);
    if n == 0 {
        return Ok(());
    }

    let norm = h.iter().map(|&z| cabs1(z)).fold(0.0, f64::max);
    let cap = SWEEPS_PER_ROW * n;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    loop {
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[lo * n + lo - 1]);
            let mut scale = cabs1(h[(lo - 1) * n + lo - 1]) + cabs1(h[lo * n + lo]);
            if scale == 0.0 {
                scale = norm;
            }
            if sub <= DEFLATION_TOLERANCE * scale || sub < f64::MIN_POSITIVE {
                h[lo * n + lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            eig[hi] = h[hi * n + hi];
            since_deflation = 0;
            if hi == 0 {
                return Ok(());
            }
            hi -= 1;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eigenvalues_2x2(
                h[lo * n + lo],
                h[lo * n + hi],
                h[hi * n + lo],
                h[hi * n + hi],
            );
            eig[lo] = l1;
            eig[hi] = l2;
            since_deflation = 0;
            if lo == 0 {
                return Ok(());
            }
            hi = lo - 1;
            continue;
        }

        if sweeps >= cap {
            return Err(Error::NoConvergence {
                size: n,
                iterations: sweeps,
            });
        }
        sweeps += 1;
        since_deflation += 1;

        let shift = if since_deflation.is_multiple_of(10) {
            // exceptional shift to break cycles
            h[hi * n + hi] + Complex64::new(0.75 * cabs1(h[hi * n + hi - 1]), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1) * n + hi - 1],
                h[(hi - 1) * n + hi],
                h[hi * n + hi - 1],
                h[hi * n + hi],
            )
        };
        qr_sweep(h, n, lo, hi, shift);
    }
}

/// One implicit single-shift QR step on the active window `lo..=hi`.
fn qr_sweep(h: &mut [Complex64], n: usize, lo: usize, hi: usize, shift: Complex64) {
    let mut x = h[lo * n + lo] - shift;
    let mut y = h[(lo + 1) * n + lo];
    for k in lo..hi {
        if k > lo {
            x = h[k * n + k - 1];
            y = h[(k + 1) * n + k - 1];
        }
        let (c, s) = givens(x, y);
        let first_col = if k > lo { k - 1 } else { lo };

        // rows k, k+1 <- G * rows
        for j in first_col..=hi {
            let p = h[k * n + j];
            let q = h[(k + 1) * n + j];
            h[k * n + j] = p * c + s * q;
            h[(k + 1) * n + j] = q * c - s.conj() * p;
        }
        if k > lo {
            h[(k + 1) * n + k - 1] = ZERO;
        }
        // cols k, k+1 <- cols * G^H
        let last_row = (k + 2).min(hi);
        for i in lo..=last_row {
            let p = h[i * n + k];
            let q = h[i * n + k + 1];
            h[i * n + k] = p * c + q * s.conj();
            h[i * n + k + 1] = q * c - p * s;
        }
        opcount::add(2 * (hi - first_col + 1) + 2 * (last_row - lo + 1));
    }
}

/// Unitary rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` onto `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let ax = x.norm();
    let r = ax.hypot(y.norm());
    (ax / r, (x / ax) * y.conj() / r)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (m1, m2) = (mid + disc, mid - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Both eigenvalues of `[[a, b], [c, d]]`, the smaller one recovered from the
/// determinant to avoid cancellation.
fn eigenvalues_2x2(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> (Complex64, Complex64) {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (p, m) = (mid + disc, mid - disc);
    let (big, small) = if p.norm() >= m.norm() { (p, m) } else { (m, p) };
    if big == ZERO {
        return (big, small);
    }
    let det = a * d - b * c;
    (big, det / big)
}
