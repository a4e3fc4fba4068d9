//! Matrix permanents by Ryser's formula with Gray-code subset traversal.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// Largest dimension accepted by [`permanent`].
pub const DEFAULT_PERMANENT_LIMIT: usize = 20;

/// Permanent of `m` in `O(2^n n)` time.
pub fn permanent(m: &CMatrix) -> Result<Complex64> {
    permanent_with_limit(m, DEFAULT_PERMANENT_LIMIT)
}

pub fn permanent_with_limit(m: &CMatrix, limit: usize) -> Result<Complex64> {
    if m.dim() > limit {
        return Err(Error::ResourceLimit {
            what: "permanent dimension",
            requested: m.dim(),
            limit,
        });
    }
    Ok(ryser(m.dim(), m.data()))
}

/// Ryser's formula over a row-major `n × n` slice.
///
/// `perm(A) = (-1)^n Σ_{S ⊆ cols} (-1)^{|S|} Π_i Σ_{j∈S} a_ij`, visiting the
/// subsets in Gray-code order so each step adds or removes one column.
pub(crate) fn ryser(n: usize, a: &[Complex64]) -> Complex64 {
    match n {
        0 => return Complex64::new(1.0, 0.0),
        1 => return a[0],
        2 => return a[0] * a[3] + a[1] * a[2],
        _ => {}
    }
    debug_assert!(n < 64);
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut subset: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u64 << j;
        subset ^= bit;
        if subset & bit != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[i * n + j];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[i * n + j];
            }
        }
        let prod = row_sums
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s);
        if subset.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_three() {
        assert_eq!(permanent(&CMatrix::identity(3)).unwrap(), c(1.0));
    }

    #[test]
    fn all_ones_two_by_two() {
        let m = CMatrix::from_fn(2, |_, _| c(1.0));
        assert_eq!(permanent(&m).unwrap(), c(2.0));
    }

    #[test]
    fn all_ones_is_factorial() {
        for n in 0..9usize {
            let m = CMatrix::from_fn(n, |_, _| c(1.0));
            let expected: f64 = (1..=n).map(|k| k as f64).product();
            assert!((permanent(&m).unwrap() - c(expected)).norm() < 1e-9);
        }
    }

    #[test]
    fn empty_matrix_is_one() {
        assert_eq!(permanent(&CMatrix::zeros(0)).unwrap(), c(1.0));
    }

    #[test]
    fn three_by_three_by_hand() {
        // perm [[1,2,3],[4,5,6],[7,8,9]] = 1(5·9+6·8) + 2(4·9+6·7) + 3(4·8+5·7) = 450
        let m = CMatrix::from_fn(3, |r, col| c((r * 3 + col + 1) as f64));
        assert!((permanent(&m).unwrap() - c(450.0)).norm() < 1e-12);
    }

    #[test]
    fn dimension_limit() {
        let m = CMatrix::identity(5);
        assert!(matches!(
            permanent_with_limit(&m, 4),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
