//! Hafnian of a low-rank matrix `A = G G^T` (up to the ignored lower
//! triangle) from the coefficients of `q(x) = prod_i sum_j g_ij x_j`.
//!
//! With `λ_p` the coefficient of `x^p` over compositions `p` of `2n` into `r`
//! parts, `haf(A) = sum_{p even} λ_p prod_i (p_i - 1)!!`. Coefficients are
//! stored densely, indexed by the colexicographic stars-and-bars rank.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Default cap on the number of stored coefficients.
pub const DEFAULT_COEFFICIENT_BUDGET: u128 = 1 << 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `2n x r` factor `G`; row `i` is the linear form `sum_j g_ij x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor(ComplexMatrix);

impl LowRankFactor {
    pub fn new(g: ComplexMatrix) -> Result<Self> {
        if g.cols() == 0 {
            return Err(Error::DimensionMismatch(
                "low-rank factor needs r >= 1 columns".into(),
            ));
        }
        if !g.rows().is_multiple_of(2) {
            return Err(Error::OddDimension(g.rows()));
        }
        Ok(Self(g))
    }

    pub fn rank(&self) -> usize {
        self.0.cols()
    }

    /// Number of vertices `2n`.
    pub fn vertices(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `G G^T`, symmetric by construction.
    pub fn gram(&self) -> ComplexMatrix {
        self.0.matmul(&self.0.transpose()).expect("shapes agree")
    }
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// `|P_{total,r}|`: compositions of `total` into `r` nonnegative parts.
pub fn partition_count(total: usize, r: usize) -> u128 {
    if r == 0 {
        return u128::from(total == 0);
    }
    binomial((total + r - 1) as u64, (r - 1) as u64)
}

/// `|E_{total,r}|`: compositions with every part even (zero if `total` is odd).
pub fn even_partition_count(total: usize, r: usize) -> u128 {
    if total % 2 == 1 {
        0
    } else {
        partition_count(total / 2, r)
    }
}

/// Colex rank of a composition: bars sit at `b_i = p_1 + .. + p_i + (i - 1)`,
/// and the rank is `sum_i C(b_i, i)` over `i = 1..r-1`.
pub fn partition_rank(parts: &[usize]) -> Result<u64> {
    if parts.is_empty() {
        return Err(Error::OutOfRange(
            "composition needs at least one part".into(),
        ));
    }
    let mut rank: u128 = 0;
    let mut bar = 0usize;
    for (i, &p) in parts[..parts.len() - 1].iter().enumerate() {
        bar += p + usize::from(i > 0);
        rank += binomial(bar as u64, (i + 1) as u64);
    }
    u64::try_from(rank).map_err(|_| Error::OutOfRange("rank exceeds u64".into()))
}

/// Inverse of [`partition_rank`] for compositions of `total` into `r` parts.
pub fn partition_unrank(rank: u64, total: usize, r: usize) -> Result<Vec<usize>> {
    if r == 0 {
        return Err(Error::OutOfRange(
            "composition needs at least one part".into(),
        ));
    }
    let count = partition_count(total, r);
    if rank as u128 >= count {
        return Err(Error::OutOfRange(format!(
            "rank {rank} outside [0, {count}) for compositions of {total} into {r} parts"
        )));
    }
    if r == 1 {
        return Ok(vec![total]);
    }
    let mut bars = vec![0usize; r - 1];
    let mut rest = rank as u128;
    let mut upper = total + r - 2;
    for i in (1..r).rev() {
        let mut b = upper;
        while binomial(b as u64, i as u64) > rest {
            b -= 1;
        }
        rest -= binomial(b as u64, i as u64);
        bars[i - 1] = b;
        upper = b.saturating_sub(1);
    }
    let mut parts = Vec::with_capacity(r);
    let mut prev: isize = -1;
    for &b in &bars {
        parts.push((b as isize - prev - 1) as usize);
        prev = b as isize;
    }
    parts.push(((total + r - 1) as isize - prev - 1) as usize);
    Ok(parts)
}

/// Dense coefficients `λ_p` of `q(x_1..x_r)` over all compositions of the degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionExpansion {
    degree: usize,
    r: usize,
    coeffs: Vec<Complex64>,
}

impl PartitionExpansion {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn variables(&self) -> usize {
        self.r
    }

    /// Coefficients in rank order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coefficient(&self, parts: &[usize]) -> Result<Complex64> {
        if parts.len() != self.r || parts.iter().sum::<usize>() != self.degree {
            return Err(Error::OutOfRange(format!(
                "{parts:?} is not a composition of {} into {} parts",
                self.degree, self.r
            )));
        }
        Ok(self.coeffs[partition_rank(parts)? as usize])
    }

    /// `(composition, coefficient)` pairs in rank order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(|(rank, &c)| {
            let p = partition_unrank(rank as u64, self.degree, self.r).expect("rank in range");
            (p, c)
        })
    }

    /// `sum_{p even} λ_p prod_i (p_i - 1)!!`.
    pub fn hafnian(&self) -> Complex64 {
        let mut total = ZERO;
        for (p, c) in self.iter() {
            if c == ZERO || p.iter().any(|&x| x % 2 == 1) {
                continue;
            }
            let weight: f64 = p
                .iter()
                .map(|&x| double_factorial_f64(x as i64 - 1))
                .product();
            total += c * weight;
        }
        total
    }
}

fn double_factorial_f64(k: i64) -> f64 {
    let mut acc = 1.0;
    let mut f = k;
    while f > 1 {
        acc *= f as f64;
        f -= 2;
    }
    acc
}

/// Expands `prod_i sum_j g_ij x_j` one linear form at a time.
pub fn expand_product(g: &LowRankFactor) -> Result<PartitionExpansion> {
    expand_product_with_budget(g, DEFAULT_COEFFICIENT_BUDGET)
}

pub fn expand_product_with_budget(g: &LowRankFactor, budget: u128) -> Result<PartitionExpansion> {
    let r = g.rank();
    let rows = g.vertices();
    let required = partition_count(rows, r);
    if required > budget {
        return Err(Error::CapacityExceeded { required, budget });
    }
    let gm = g.matrix();

    // binom[a][b] for the incremental re-ranking below
    let max_a = rows + r;
    let table: Vec<Vec<u64>> = (0..=max_a)
        .map(|a| {
            (0..r)
                .map(|b| binomial(a as u64, b as u64) as u64)
                .collect()
        })
        .collect();

    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut bars = vec![0usize; r.saturating_sub(1)];
    for (t, row_index) in (0..rows).enumerate() {
        let form = gm.row(row_index);
        let mut next = vec![ZERO; partition_count(t + 1, r) as usize];
        for (rank, &c) in coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let p = partition_unrank(rank as u64, t, r)?;
            let mut b = 0usize;
            for (i, &pi) in p[..r - 1].iter().enumerate() {
                b += pi + usize::from(i > 0);
                bars[i] = b;
            }
            // raising p_j by one shifts every bar from index j onward
            for (j, &gj) in form.iter().enumerate() {
                if gj == ZERO {
                    continue;
                }
                let target: u64 = bars
                    .iter()
                    .enumerate()
                    .map(|(i, &bi)| table[bi + usize::from(i >= j)][i + 1])
                    .sum();
                next[target as usize] += c * gj;
            }
        }
        coeffs = next;
    }
    Ok(PartitionExpansion {
        degree: rows,
        r,
        coeffs,
    })
}

/// `haf(G G^T)` in `binom(2n + r - 1, r - 1) poly(n)` time.
pub fn hafnian_lowrank(g: &LowRankFactor) -> Result<Complex64> {
    Ok(expand_product(g)?.hafnian())
}

pub fn hafnian_lowrank_with_budget(g: &LowRankFactor, budget: u128) -> Result<Complex64> {
    Ok(expand_product_with_budget(g, budget)?.hafnian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn factor<R: AsRef<[f64]>>(rows: &[R]) -> LowRankFactor {
        LowRankFactor::new(ComplexMatrix::from_real_rows(rows).unwrap()).unwrap()
    }

    fn random_factor(rows: usize, r: usize, seed: u64) -> LowRankFactor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LowRankFactor::new(ComplexMatrix::from_fn(rows, r, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
        .unwrap()
    }

    /// Oracle: multiply the linear forms term by term into a sparse map.
    fn naive_expansion(g: &LowRankFactor) -> HashMap<Vec<usize>, Complex64> {
        let r = g.rank();
        let mut terms: HashMap<Vec<usize>, Complex64> = HashMap::from([(vec![0; r], c(1.0))]);
        for i in 0..g.vertices() {
            let mut next = HashMap::new();
            for (p, v) in &terms {
                for j in 0..r {
                    let mut q = p.clone();
                    q[j] += 1;
                    *next.entry(q).or_insert(c(0.0)) += v * g.matrix()[(i, j)];
                }
            }
            terms = next;
        }
        terms
    }

    #[test]
    fn rank_examples_and_bijection() {
        assert_eq!(partition_rank(&[0, 2]).unwrap(), 0);
        assert_eq!(partition_rank(&[1, 1]).unwrap(), 1);
        assert_eq!(partition_rank(&[2, 0]).unwrap(), 2);
        assert_eq!(partition_count(2, 2), 3);
        for rank in 0..partition_count(6, 3) as u64 {
            let p = partition_unrank(rank, 6, 3).unwrap();
            assert_eq!(p.iter().sum::<usize>(), 6);
            assert_eq!(partition_rank(&p).unwrap(), rank);
        }
        assert!(matches!(
            partition_unrank(28, 6, 3),
            Err(Error::OutOfRange(_))
        ));
        assert_eq!(partition_unrank(0, 5, 1).unwrap(), vec![5]);
    }

    #[test]
    fn even_partition_counts() {
        assert_eq!(even_partition_count(4, 2), 3);
        assert_eq!(even_partition_count(4, 2), binomial(3, 1));
        let brute = (0..partition_count(8, 3) as u64)
            .filter(|&k| {
                partition_unrank(k, 8, 3)
                    .unwrap()
                    .iter()
                    .all(|p| p % 2 == 0)
            })
            .count() as u128;
        assert_eq!(brute, even_partition_count(8, 3));
    }

    #[test]
    fn expansion_examples() {
        let e = expand_product(&factor(&[&[1.0], &[1.0]])).unwrap();
        assert_eq!(e.coefficient(&[2]).unwrap(), c(1.0));

        let e = expand_product(&factor(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(e.coefficient(&[1, 1]).unwrap(), c(1.0));
        assert_eq!(e.coefficient(&[2, 0]).unwrap(), c(0.0));
        assert_eq!(e.coefficient(&[0, 2]).unwrap(), c(0.0));
    }

    #[test]
    fn expansion_matches_naive_oracle() {
        for (rows, r, seed) in [(4, 2, 1), (6, 3, 2), (6, 1, 3), (4, 4, 4)] {
            let g = random_factor(rows, r, seed);
            let e = expand_product(&g).unwrap();
            let naive = naive_expansion(&g);
            for (p, v) in e.iter() {
                let want = naive.get(&p).copied().unwrap_or(c(0.0));
                assert!((v - want).norm() < 1e-13, "{p:?}");
            }
        }
    }

    #[test]
    fn row_sum_checksum() {
        let g = random_factor(8, 3, 17);
        let e = expand_product(&g).unwrap();
        let total: Complex64 = e.coefficients().iter().sum();
        let want: Complex64 = (0..8)
            .map(|i| g.matrix().row(i).iter().sum::<Complex64>())
            .product();
        assert!((total - want).norm() <= 1e-12 * want.norm());
    }

    #[test]
    fn hafnian_examples() {
        assert_eq!(hafnian_lowrank(&factor(&[&[1.0]; 4])).unwrap(), c(3.0));
        assert_eq!(hafnian_lowrank(&factor(&[&[1.0]; 2])).unwrap(), c(1.0));
        assert_eq!(
            hafnian_lowrank(&factor(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap(),
            c(0.0)
        );
    }

    #[test]
    fn odd_coefficients_do_not_contribute() {
        let g = random_factor(6, 3, 5);
        let mut e = expand_product(&g).unwrap();
        let before = e.hafnian();
        let odd: Vec<usize> = e
            .iter()
            .enumerate()
            .filter(|(_, (p, _))| p.iter().any(|x| x % 2 == 1))
            .map(|(k, _)| k)
            .collect();
        for k in odd {
            e.coefficients_mut()[k] = c(0.0);
        }
        assert_eq!(e.hafnian(), before);
    }

    #[test]
    fn capacity_budget() {
        let g = random_factor(10, 3, 1);
        let err = hafnian_lowrank_with_budget(&g, 10).unwrap_err();
        assert!(matches!(
            err,
            Error::CapacityExceeded {
                required: 66,
                budget: 10
            }
        ));
    }

    #[test]
    fn invalid_factors() {
        assert!(matches!(
            LowRankFactor::new(ComplexMatrix::zeros(3, 1)),
            Err(Error::OddDimension(3))
        ));
        assert!(LowRankFactor::new(ComplexMatrix::zeros(2, 0)).is_err());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }
}
