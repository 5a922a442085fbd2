//! Exact solution of small rational linear systems by fraction-free
//! (Bareiss) elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::rational::common_denominator;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearSolution {
    Unique(Vec<BigRational>),
    /// Consistent, with a solution set of dimension `unknowns - rank`.
    Underdetermined { rank: usize },
    Inconsistent,
}

/// Solves `A z = b` where `a` holds the rows of `A`. Every row must have the
/// same length (the number of unknowns).
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> LinearSolution {
    assert_eq!(a.len(), b.len());
    let unknowns = a.first().map_or(0, Vec::len);
    // Clear denominators row by row; the augmented column is last.
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            debug_assert_eq!(row.len(), unknowns);
            let scale = common_denominator(row.iter().chain(std::iter::once(rhs)));
            row.iter()
                .chain(std::iter::once(rhs))
                .map(|r| r.numer() * (&scale / r.denom()))
                .collect()
        })
        .collect();

    let rows = m.len();
    let mut pivot_cols = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..unknowns {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in (c + 1)..=unknowns {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                let (q, rem) = v.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                m[i][j] = q;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivot_cols.push(c);
        r += 1;
    }
    let rank = r;
    if m[rank..].iter().any(|row| !row[unknowns].is_zero()) {
        return LinearSolution::Inconsistent;
    }
    if rank < unknowns {
        return LinearSolution::Underdetermined { rank };
    }
    let mut z = vec![BigRational::zero(); unknowns];
    for (k, &c) in pivot_cols.iter().enumerate().rev() {
        let mut acc = BigRational::from_integer(m[k][unknowns].clone());
        for j in c + 1..unknowns {
            if !m[k][j].is_zero() {
                acc -= BigRational::from_integer(m[k][j].clone()) * &z[j];
            }
        }
        z[c] = acc / BigRational::from_integer(m[k][c].clone());
    }
    LinearSolution::Unique(z)
}
