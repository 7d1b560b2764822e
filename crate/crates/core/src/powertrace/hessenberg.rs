use num_complex::Complex64;

use super::{cabs1, opcount};

/// Reduces the row-major `n x n` matrix in `a` to upper Hessenberg form in
/// place using pivoted elementary (Gauss) similarity transforms.
///
/// Entries below the first subdiagonal are set to exact zeros. The spectrum
/// is preserved; the transforms are not returned.
pub fn reduce_to_hessenberg(a: &mut [Complex64], n: usize) {
    debug_assert_eq!(a.len(), n * n);
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut pivot_row = k + 1;
        let mut best = cabs1(a[(k + 1) * n + k]);
        for i in k + 2..n {
            let v = cabs1(a[i * n + k]);
            if v > best {
                best = v;
                pivot_row = i;
            }
        }
        if best == 0.0 {
            continue;
        }
        if pivot_row != k + 1 {
            let (p, q) = (pivot_row, k + 1);
            for j in k..n {
                a.swap(p * n + j, q * n + j);
            }
            for r in 0..n {
                a.swap(r * n + p, r * n + q);
            }
        }
        let pivot = a[(k + 1) * n + k];
        for i in k + 2..n {
            let x = a[i * n + k];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            let m = x / pivot;
            a[i * n + k] = Complex64::new(0.0, 0.0);
            // row_i -= m * row_{k+1}
            let (upper, lower) = a.split_at_mut(i * n);
            let src = &upper[(k + 1) * n + k + 1..(k + 2) * n];
            for (dst, &s) in lower[k + 1..n].iter_mut().zip(src) {
                *dst -= m * s;
            }
            // col_{k+1} += m * col_i
            for r in 0..n {
                let s = a[r * n + i];
                a[r * n + k + 1] += m * s;
            }
            opcount::add(2 * n - k - 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powertrace::test_support::{random_matrix, trace_of_power};

    #[test]
    fn result_is_hessenberg_and_keeps_power_traces() {
        for n in [1usize, 2, 3, 5, 8] {
            let b = random_matrix(n, 11 + n as u64);
            let mut h = b.as_slice().to_vec();
            reduce_to_hessenberg(&mut h, n);
            for i in 0..n {
                for j in 0..i.saturating_sub(1) {
                    assert_eq!(h[i * n + j], Complex64::new(0.0, 0.0));
                }
            }
            let hm = crate::matrix::ComplexMatrix::from_vec(n, n, h).unwrap();
            for k in 1..=3 {
                let (want, got) = (trace_of_power(&b, k), trace_of_power(&hm, k));
                assert!(
                    (want - got).norm() <= 1e-11 * (1.0 + want.norm()),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn zero_column_is_skipped() {
        let mut a = vec![Complex64::new(0.0, 0.0); 16];
        a[0] = Complex64::new(1.0, 0.0);
        a[15] = Complex64::new(2.0, 0.0);
        let before = a.clone();
        reduce_to_hessenberg(&mut a, 4);
        assert_eq!(a, before);
    }
}
