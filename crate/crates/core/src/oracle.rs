//! Reference implementations used to validate the engine: brute-force
//! matching enumeration, Ryser's permanent, and exact combinatorial counts.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, SymmetricMatrix};

pub const HAFNIAN_BRUTEFORCE_LIMIT: usize = 16;
pub const LOOP_HAFNIAN_BRUTEFORCE_LIMIT: usize = 14;
pub const RYSER_LIMIT: usize = 20;
pub const MATCHING_COUNT_LIMIT: usize = 12;

/// A set of vertex-disjoint pairs `(i, j)`, `i <= j`; `i == j` is a loop.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Bitmask of covered vertices.
    pub fn covered(&self) -> u64 {
        self.pairs
            .iter()
            .fold(0u64, |m, &(i, j)| m | (1 << i) | (1 << j))
    }

    pub fn loops(&self) -> usize {
        self.pairs.iter().filter(|(i, j)| i == j).count()
    }

    /// Product of the matched entries of `a`.
    pub fn weight(&self, a: &SymmetricMatrix) -> Complex64 {
        self.pairs.iter().map(|&(i, j)| a[(i, j)]).product()
    }
}

/// Visits every perfect matching (or, with `loops`, every single-pair
/// matching) of `n` vertices exactly once.
///
/// The smallest uncovered vertex is matched to each larger uncovered vertex
/// in turn, and additionally to itself when `loops` is set.
type Visitor<'a> = dyn FnMut(&[(usize, usize)]) + 'a;

pub fn for_each_matching(n: usize, loops: bool, mut visit: impl FnMut(&[(usize, usize)])) {
    fn recurse(
        remaining: u64,
        loops: bool,
        stack: &mut Vec<(usize, usize)>,
        visit: &mut Visitor<'_>,
    ) {
        if remaining == 0 {
            visit(stack);
            return;
        }
        let i = remaining.trailing_zeros() as usize;
        let rest = remaining & !(1 << i);
        if loops {
            stack.push((i, i));
            recurse(rest, loops, stack, visit);
            stack.pop();
        }
        let mut partners = rest;
        while partners != 0 {
            let j = partners.trailing_zeros() as usize;
            partners &= partners - 1;
            stack.push((i, j));
            recurse(rest & !(1 << j), loops, stack, visit);
            stack.pop();
        }
    }

    assert!(n < 64, "matching enumeration is limited to 63 vertices");
    if !loops && n % 2 == 1 {
        return;
    }
    let all = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    let mut stack = Vec::with_capacity(n);
    recurse(all, loops, &mut stack, &mut visit);
}

pub fn perfect_matchings(n: usize) -> Vec<Matching> {
    let mut out = Vec::new();
    for_each_matching(n, false, |p| out.push(Matching { pairs: p.to_vec() }));
    out
}

/// Perfect matchings of the complete graph with loops on `n` vertices.
pub fn single_pair_matchings(n: usize) -> Vec<Matching> {
    let mut out = Vec::new();
    for_each_matching(n, true, |p| out.push(Matching { pairs: p.to_vec() }));
    out
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::TooLarge { size: n, limit });
    }
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    Ok(())
}

fn weighted_sum(a: &SymmetricMatrix, loops: bool) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for_each_matching(a.n(), loops, |pairs| {
        total += pairs.iter().map(|&(i, j)| a[(i, j)]).product::<Complex64>();
    });
    total
}

/// Sum over all perfect matchings of the products of matched entries.
pub fn hafnian_bruteforce(a: &SymmetricMatrix) -> Result<Complex64> {
    guard(a.n(), HAFNIAN_BRUTEFORCE_LIMIT)?;
    Ok(weighted_sum(a, false))
}

/// Sum over all single-pair matchings (loops allowed).
pub fn loop_hafnian_bruteforce(a: &SymmetricMatrix) -> Result<Complex64> {
    guard(a.n(), LOOP_HAFNIAN_BRUTEFORCE_LIMIT)?;
    Ok(weighted_sum(a, true))
}

/// Permanent by Ryser's inclusion–exclusion formula with Gray-code updates, `O(2^m m)`.
pub fn permanent_ryser(w: &ComplexMatrix) -> Result<Complex64> {
    if !w.is_square() {
        return Err(Error::NonSquare {
            rows: w.rows(),
            cols: w.cols(),
        });
    }
    let m = w.rows();
    if m > RYSER_LIMIT {
        return Err(Error::TooLarge {
            size: m,
            limit: RYSER_LIMIT,
        });
    }
    if m == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); m];
    let mut total = Complex64::new(0.0, 0.0);
    let mut subset = 0u64;
    for k in 1u64..1 << m {
        let j = k.trailing_zeros() as usize;
        let bit = 1u64 << j;
        let adding = subset & bit == 0;
        subset ^= bit;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += w[(i, j)];
            } else {
                *s -= w[(i, j)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if (m - subset.count_ones() as usize).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// `k!! = k (k-2) (k-4) ...`, with `k!! = 1` for `k <= 0`.
pub fn double_factorial(k: i64) -> BigUint {
    let mut acc = BigUint::one();
    let mut f = k;
    while f > 1 {
        acc *= f as u64;
        f -= 2;
    }
    acc
}

pub fn factorial(k: u64) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, f| acc * f)
}

/// Telephone (involution) numbers: `T(n) = T(n-1) + (n-1) T(n-2)`, `T(0) = T(1) = 1`.
pub fn telephone(n: u64) -> BigUint {
    let (mut prev, mut cur) = (BigUint::one(), BigUint::one());
    for k in 2..=n {
        let next = &cur + &prev * (k - 1);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Number of matchings (any size, the empty one included) of the loopless
/// graph whose edges are the nonzero off-diagonal entries of `adjacency`.
pub fn matching_count_bruteforce(adjacency: &SymmetricMatrix) -> Result<BigUint> {
    fn count(adj: &[u64], remaining: u64) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let i = remaining.trailing_zeros() as usize;
        let rest = remaining & !(1 << i);
        // vertex i left unmatched
        let mut total = count(adj, rest);
        let mut partners = adj[i] & rest;
        while partners != 0 {
            let j = partners.trailing_zeros() as usize;
            partners &= partners - 1;
            total += count(adj, rest & !(1 << j));
        }
        total
    }

    let n = adjacency.n();
    if n > MATCHING_COUNT_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: MATCHING_COUNT_LIMIT,
        });
    }
    let adj: Vec<u64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && !adjacency[(i, j)].is_zero())
                .fold(0u64, |m, j| m | (1 << j))
        })
        .collect();
    let all = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    Ok(BigUint::from(count(&adj, all)))
}
