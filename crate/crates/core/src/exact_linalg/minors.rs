use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::{determinant, IntMatrix};
use crate::error::{Error, Result};

/// Extremal data over the nonsingular m×m column minors of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorSummary {
    /// Largest absolute minor.
    pub delta: BigInt,
    /// Greatest common divisor of all minors.
    pub gamma: BigInt,
    /// Smallest positive absolute minor.
    pub eta: BigInt,
    pub count_nonsingular: usize,
}

impl MinorSummary {
    /// `delta / gamma`, the normalized largest minor.
    pub fn normalized_delta(&self) -> BigInt {
        &self.delta / &self.gamma
    }

    pub fn normalized_eta(&self) -> BigInt {
        &self.eta / &self.gamma
    }
}

/// Enumerates every m-subset of columns and summarizes the nonzero
/// determinants.
pub fn minor_summary(a: &IntMatrix) -> Result<MinorSummary> {
    let m = a.rows();
    let n = a.cols();
    if m > n {
        return Err(Error::RankDeficient { rank: n, rows: m });
    }
    let mut delta = BigInt::zero();
    let mut gamma = BigInt::zero();
    let mut eta: Option<BigInt> = None;
    let mut count = 0;
    for cols in (0..n).combinations(m) {
        let d = determinant(&a.select_columns(&cols))?.abs();
        if d.is_zero() {
            continue;
        }
        count += 1;
        gamma = gamma.gcd(&d);
        if d > delta {
            delta = d.clone();
        }
        if eta.as_ref().map_or(true, |e| &d < e) {
            eta = Some(d);
        }
    }
    match eta {
        Some(eta) => Ok(MinorSummary {
            delta,
            gamma,
            eta,
            count_nonsingular: count,
        }),
        None => Err(Error::RankDeficient {
            rank: a.rank(),
            rows: m,
        }),
    }
}

/// `det(A Aᵀ)`, used by the Cauchy–Binet worst-case sparsity bound.
pub fn gram_determinant(a: &IntMatrix) -> Result<BigInt> {
    determinant(&a.mul(&a.transpose())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_identity_blocks() {
        let s = minor_summary(&mat(&[&[2, 0, 1, 0], &[0, 2, 0, 1]])).unwrap();
        assert_eq!(s.delta, BigInt::from(4));
        assert_eq!(s.gamma, BigInt::from(1));
        assert_eq!(s.eta, BigInt::from(1));
        // {1,2}=4, {1,4}=2, {2,3}=-2, {3,4}=1; {1,3},{2,4} singular
        assert_eq!(s.count_nonsingular, 4);
    }

    #[test]
    fn single_row() {
        let s = minor_summary(&mat(&[&[2, 1]])).unwrap();
        assert_eq!((s.delta, s.gamma, s.eta), (2.into(), 1.into(), 1.into()));
    }

    #[test]
    fn identity() {
        let s = minor_summary(&IntMatrix::identity(3)).unwrap();
        assert_eq!((s.delta, s.gamma, s.eta), (1.into(), 1.into(), 1.into()));
        assert_eq!(s.count_nonsingular, 1);
    }

    #[test]
    fn rank_deficient_is_error() {
        assert!(matches!(
            minor_summary(&mat(&[&[1, 2], &[2, 4]])),
            Err(Error::RankDeficient { rank: 1, rows: 2 })
        ));
    }

    #[test]
    fn delta_bounded_by_gram_root() {
        let a = mat(&[&[2, 0, 1, 3], &[1, 2, 0, 1]]);
        let s = minor_summary(&a).unwrap();
        let g = gram_determinant(&a).unwrap();
        assert!(&s.delta * &s.delta <= g);
        assert!(s.gamma <= s.eta && s.eta <= s.delta);
    }
}
