//! Least-squares fit of `t(n) = a n^b 2^(c n)` in log space.

use nalgebra::{DMatrix, DVector};

use super::BenchmarkRecord;
use crate::error::{Error, Result};

/// Minimum number of sizes above the threshold needed for a fit.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Root-mean-square residual of `log2 t`.
    pub residual: f64,
    /// Coefficient of determination on `log2 t`.
    pub r_squared: f64,
    pub points: usize,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Median wall time per `n`, ascending in `n`.
pub fn median_times(records: &[BenchmarkRecord]) -> Vec<(usize, f64)> {
    group_medians(records.iter().map(|r| (r.n, r.wall_seconds)))
}

fn group_medians(points: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut groups: Vec<(usize, Vec<f64>)> = Vec::new();
    for (n, t) in points {
        match groups.iter_mut().find(|(m, _)| *m == n) {
            Some((_, v)) => v.push(t),
            None => groups.push((n, vec![t])),
        }
    }
    groups.sort_by_key(|(n, _)| *n);
    groups
        .into_iter()
        .map(|(n, mut v)| (n, median(&mut v)))
        .collect()
}

/// Median `wall_seconds` per `n` from sweep CSV text, locating the columns by
/// header name.
pub fn parse_csv_times(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or(Error::InsufficientData {
        found: 0,
        needed: MIN_FIT_POINTS,
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|&c| c == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                column: 1,
                message: format!("missing column '{name}'"),
            })
    };
    let (n_col, t_col) = (find("n")?, find("wall_seconds")?);
    let mut points = Vec::new();
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let field = |col: usize| {
            fields
                .get(col)
                .map(|s| s.trim())
                .ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    column: col + 1,
                    message: "row too short".into(),
                })
        };
        let bad = |col: usize, what: &str| Error::Parse {
            line: idx + 1,
            column: col + 1,
            message: format!("invalid {what}"),
        };
        let n = field(n_col)?
            .parse::<usize>()
            .map_err(|_| bad(n_col, "n"))?;
        let t = field(t_col)?
            .parse::<f64>()
            .map_err(|_| bad(t_col, "wall_seconds"))?;
        points.push((n, t));
    }
    Ok(group_medians(points.into_iter()))
}

/// Fits the median time per `n` over records with `n > n_threshold`.
pub fn fit_scaling(records: &[BenchmarkRecord], n_threshold: usize) -> Result<ScalingFit> {
    fit_scaling_points(&median_times(records), n_threshold)
}

/// Fits `log2 t = log2 a + b log2 n + c n` over points with `n > n_threshold`.
pub fn fit_scaling_points(points: &[(usize, f64)], n_threshold: usize) -> Result<ScalingFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, t)| n > n_threshold && t > 0.0)
        .map(|&(n, t)| (n as f64, t.log2()))
        .collect();
    if used.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            found: used.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let m = used.len();
    let x = DMatrix::from_fn(m, 3, |i, j| match j {
        0 => 1.0,
        1 => used[i].0.log2(),
        _ => used[i].0,
    });
    let y = DVector::from_iterator(m, used.iter().map(|p| p.1));
    let beta = x
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::OutOfRange(format!("least-squares solve failed: {e}")))?;
    let resid = &y - &x * &beta;
    let ss_res = resid.norm_squared();
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(ScalingFit {
        a: beta[0].exp2(),
        b: beta[1],
        c: beta[2],
        residual: (ss_res / m as f64).sqrt(),
        r_squared: if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            1.0
        },
        points: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_generator() {
        let pts: Vec<(usize, f64)> = (10..=40)
            .step_by(2)
            .map(|n| (n, 3e-8 * (n as f64).powi(3) * 2f64.powf(n as f64 / 2.0)))
            .collect();
        let fit = fit_scaling_points(&pts, 0).unwrap();
        assert!((fit.b - 3.0).abs() < 1e-9, "{fit:?}");
        assert!((fit.c - 0.5).abs() < 1e-9);
        assert!((fit.a / 3e-8 - 1.0).abs() < 1e-8);
        assert!(fit.residual < 1e-9);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn needs_five_points_above_threshold() {
        let pts: Vec<(usize, f64)> = (2..=20).step_by(2).map(|n| (n, n as f64)).collect();
        assert!(matches!(
            fit_scaling_points(&pts, 12),
            Err(Error::InsufficientData {
                found: 4,
                needed: 5
            })
        ));
    }

    #[test]
    fn csv_times_are_grouped_by_median() {
        let text = "family,n,threads,backend,mode,repetition,wall_seconds,result_re,result_im,reference,percent_error_re,percent_error_abs\n\
                    complete,4,1,spectral,deterministic,0,3e0,3e0,0e0,3,0e0,0e0\n\
                    complete,4,1,spectral,deterministic,1,1e0,3e0,0e0,3,0e0,0e0\n\
                    complete,4,1,spectral,deterministic,2,2e0,3e0,0e0,3,0e0,0e0\n\
                    complete,2,1,spectral,deterministic,0,5e-1,1e0,0e0,1,0e0,0e0\n";
        assert_eq!(parse_csv_times(text).unwrap(), vec![(2, 0.5), (4, 2.0)]);
        assert!(matches!(
            parse_csv_times("a,b\n1,2\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
