use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{determinant, IntMatrix};
use crate::error::{Error, Result};

/// Full-rank lattice in Zᵐ stored by its column Hermite normal form:
/// lower triangular, positive diagonal, and `0 <= h[i][j] < h[i][i]` for
/// `j < i`. Two bases of the same lattice compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeBasis {
    basis: IntMatrix,
    determinant: BigInt,
}

impl LatticeBasis {
    /// Lattice generated by the columns of `generators` (m×n, rank m).
    pub fn from_generators(generators: &IntMatrix) -> Result<Self> {
        let basis = column_hnf(generators)?;
        let determinant = (0..basis.rows()).map(|i| basis[(i, i)].clone()).product();
        Ok(LatticeBasis { basis, determinant })
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn determinant(&self) -> &BigInt {
        &self.determinant
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Integer coordinates of `b` in the Hermite basis, if `b` is a member.
    pub fn coordinates(&self, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        let m = self.dim();
        if b.len() != m {
            return Err(Error::Dimension(format!(
                "vector of length {} for lattice of dimension {m}",
                b.len()
            )));
        }
        let mut x: Vec<BigInt> = Vec::with_capacity(m);
        for i in 0..m {
            let mut rest = b[i].clone();
            for (j, xj) in x.iter().enumerate() {
                rest -= &self.basis[(i, j)] * xj;
            }
            let (q, r) = rest.div_rem(&self.basis[(i, i)]);
            if !r.is_zero() {
                return Ok(None);
            }
            x.push(q);
        }
        Ok(Some(x))
    }

    pub fn contains(&self, b: &[BigInt]) -> Result<bool> {
        Ok(self.coordinates(b)?.is_some())
    }
}

/// Hermite basis of the lattice `A·Zⁿ`.
pub fn lattice_of_columns(a: &IntMatrix) -> Result<LatticeBasis> {
    LatticeBasis::from_generators(a)
}

/// Membership by triangular solve against the Hermite basis.
pub fn lattice_member(l: &LatticeBasis, b: &[BigInt]) -> Result<bool> {
    l.contains(b)
}

fn column_hnf(a: &IntMatrix) -> Result<IntMatrix> {
    let m = a.rows();
    let n = a.cols();
    let mut h = a.clone();
    for i in 0..m {
        // Fold columns i+1.. into column i with extended-gcd steps.
        for j in i + 1..n {
            if h[(i, j)].is_zero() {
                continue;
            }
            if h[(i, i)].is_zero() {
                h.swap_columns(i, j);
                continue;
            }
            let a_ii = h[(i, i)].clone();
            let a_ij = h[(i, j)].clone();
            let eg = a_ii.extended_gcd(&a_ij);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            let p = &a_ij / &g;
            let q = &a_ii / &g;
            for r in i..m {
                let ci = h[(r, i)].clone();
                let cj = h[(r, j)].clone();
                h[(r, i)] = &x * &ci + &y * &cj;
                h[(r, j)] = &q * &cj - &p * &ci;
            }
        }
        if h[(i, i)].is_zero() {
            let rank = a.rank();
            return Err(Error::RankDeficient { rank, rows: m });
        }
        if h[(i, i)].is_negative() {
            for r in i..m {
                h[(r, i)] = -h[(r, i)].clone();
            }
        }
        let d = h[(i, i)].clone();
        for j in 0..i {
            let q = h[(i, j)].div_floor(&d);
            if q.is_zero() {
                continue;
            }
            for r in i..m {
                let v = &h[(r, j)] - &q * &h[(r, i)];
                h[(r, j)] = v;
            }
        }
    }
    Ok(h.select_columns(&(0..m).collect::<Vec<_>>()))
}

/// Canonical residue class of Λ/Γ: remainders modulo the invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueId(pub Vec<BigInt>);

impl ResidueId {
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// The finite group Λ/Γ for a full-rank sublattice Γ = B·Zᵐ of Λ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientGroup {
    sublattice: LatticeBasis,
    superlattice: LatticeBasis,
    invariant_factors: Vec<BigInt>,
    order: BigInt,
    /// Left Smith transform `U` with `U·(H⁻¹B)·V = diag(invariant_factors)`.
    transform: IntMatrix,
}

impl QuotientGroup {
    pub fn sublattice(&self) -> &LatticeBasis {
        &self.sublattice
    }

    pub fn superlattice(&self) -> &LatticeBasis {
        &self.superlattice
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn order(&self) -> &BigInt {
        &self.order
    }

    pub fn identity(&self) -> ResidueId {
        ResidueId(vec![BigInt::zero(); self.invariant_factors.len()])
    }

    pub fn residue_of(&self, b: &[BigInt]) -> Result<ResidueId> {
        let y = self
            .superlattice
            .coordinates(b)?
            .ok_or_else(|| Error::NotInLattice(b.iter().map(|x| x.to_string()).collect()))?;
        let uy = self.transform.mul_vec(&y)?;
        Ok(ResidueId(
            uy.iter()
                .zip(&self.invariant_factors)
                .map(|(v, d)| v.mod_floor(d))
                .collect(),
        ))
    }

    pub fn add(&self, a: &ResidueId, b: &ResidueId) -> ResidueId {
        ResidueId(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.invariant_factors)
                .map(|((x, y), d)| (x + y).mod_floor(d))
                .collect(),
        )
    }

    pub fn scale(&self, a: &ResidueId, k: &BigInt) -> ResidueId {
        ResidueId(
            a.0.iter()
                .zip(&self.invariant_factors)
                .map(|(x, d)| (x * k).mod_floor(d))
                .collect(),
        )
    }

    /// Mixed-radix position of a residue in `0..order`.
    pub fn index_of(&self, r: &ResidueId) -> usize {
        let mut idx = 0usize;
        let mut radix = 1usize;
        for (x, d) in r.0.iter().zip(&self.invariant_factors) {
            let x: usize = x.try_into().expect("residue component fits in usize");
            let d: usize = d.try_into().expect("invariant factor fits in usize");
            idx += x * radix;
            radix *= d;
        }
        idx
    }

    pub fn from_index(&self, mut idx: usize) -> ResidueId {
        ResidueId(
            self.invariant_factors
                .iter()
                .map(|d| {
                    let d: usize = d.try_into().expect("invariant factor fits in usize");
                    let x = idx % d;
                    idx /= d;
                    BigInt::from(x)
                })
                .collect(),
        )
    }

    /// All residues, in index order.
    pub fn residues(&self) -> Vec<ResidueId> {
        let n: usize = (&self.order).try_into().expect("group order fits in usize");
        (0..n).map(|i| self.from_index(i)).collect()
    }
}

/// Quotient Λ/Γ of `superlattice` by the lattice spanned by the columns of
/// the nonsingular matrix `b`.
pub fn quotient(superlattice: &LatticeBasis, b: &IntMatrix) -> Result<QuotientGroup> {
    let m = superlattice.dim();
    if b.rows() != m || b.cols() != m {
        return Err(Error::Dimension(format!(
            "sublattice basis must be {m}x{m}, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    if determinant(b)?.is_zero() {
        return Err(Error::RankDeficient {
            rank: b.rank(),
            rows: m,
        });
    }
    let mut cols = Vec::with_capacity(m);
    for j in 0..m {
        cols.push(
            superlattice
                .coordinates(&b.column(j))?
                .ok_or(Error::NotSublattice)?,
        );
    }
    let transition = IntMatrix::from_columns(&cols)?;
    let (diag, transform) = smith_left(transition);
    let order = diag.iter().product();
    Ok(QuotientGroup {
        sublattice: LatticeBasis::from_generators(b)?,
        superlattice: superlattice.clone(),
        invariant_factors: diag,
        order,
        transform,
    })
}

/// Smith normal form of a nonsingular square matrix. Returns the diagonal
/// (each entry dividing the next) and the accumulated left transform.
fn smith_left(mut t: IntMatrix) -> (Vec<BigInt>, IntMatrix) {
    let n = t.rows();
    let mut u = IntMatrix::identity(n);
    let add_row = |m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt| {
        for j in 0..m.cols() {
            let v = &m[(dst, j)] + k * &m[(src, j)];
            m[(dst, j)] = v;
        }
    };
    for k in 0..n {
        loop {
            let Some((pi, pj)) = (k..n)
                .flat_map(|i| (k..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !t[(i, j)].is_zero())
                .min_by_key(|&(i, j)| t[(i, j)].abs())
            else {
                break;
            };
            t.swap_rows(k, pi);
            u.swap_rows(k, pi);
            t.swap_columns(k, pj);

            let p = t[(k, k)].clone();
            for i in k + 1..n {
                let q = -t[(i, k)].div_floor(&p);
                if !q.is_zero() {
                    add_row(&mut t, i, k, &q);
                    add_row(&mut u, i, k, &q);
                }
            }
            for j in k + 1..n {
                let q = t[(k, j)].div_floor(&p);
                if !q.is_zero() {
                    for r in 0..n {
                        let v = &t[(r, j)] - &q * &t[(r, k)];
                        t[(r, j)] = v;
                    }
                }
            }
            let dirty = (k + 1..n).any(|i| !t[(i, k)].is_zero())
                || (k + 1..n).any(|j| !t[(k, j)].is_zero());
            if dirty {
                continue;
            }
            let bad_row = (k + 1..n)
                .find(|&i| (k + 1..n).any(|j| !t[(i, j)].is_multiple_of(&p)));
            match bad_row {
                Some(i) => {
                    let one = BigInt::one();
                    add_row(&mut t, k, i, &one);
                    add_row(&mut u, k, i, &one);
                }
                None => break,
            }
        }
        if t[(k, k)].is_negative() {
            for j in 0..n {
                t[(k, j)] = -t[(k, j)].clone();
                u[(k, j)] = -u[(k, j)].clone();
            }
        }
    }
    ((0..n).map(|i| t[(i, i)].clone()).collect(), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::matrix::int_vec;
    use crate::exact_linalg::minors::minor_summary;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn lattice_examples() {
        let l = lattice_of_columns(&mat(&[&[2, 0, 1, 0], &[0, 2, 0, 1]])).unwrap();
        assert_eq!(l.basis(), &IntMatrix::identity(2));
        assert_eq!(l.determinant(), &BigInt::from(1));

        let l = lattice_of_columns(&mat(&[&[2, 0], &[0, 2]])).unwrap();
        assert_eq!(l.basis(), &mat(&[&[2, 0], &[0, 2]]));
        assert_eq!(l.determinant(), &BigInt::from(4));

        let l = lattice_of_columns(&mat(&[&[2, 4]])).unwrap();
        assert_eq!(l.basis(), &mat(&[&[2]]));
    }

    #[test]
    fn hnf_is_canonical() {
        let a = lattice_of_columns(&mat(&[&[2, 1], &[0, 1]])).unwrap();
        let b = lattice_of_columns(&mat(&[&[3, 1, 5], &[1, 1, 3]])).unwrap();
        assert_eq!(a, b);
        let h = a.basis();
        assert!(h[(0, 1)].is_zero());
        assert!(h[(1, 0)] >= BigInt::zero() && h[(1, 0)] < h[(1, 1)]);
    }

    #[test]
    fn membership_examples() {
        let z2 = lattice_of_columns(&IntMatrix::identity(2)).unwrap();
        assert!(lattice_member(&z2, &int_vec(&[-7, 13])).unwrap());
        let two_z = lattice_of_columns(&mat(&[&[2]])).unwrap();
        assert!(!lattice_member(&two_z, &int_vec(&[3])).unwrap());
        let l = LatticeBasis::from_generators(&mat(&[&[2, 1], &[0, 1]])).unwrap();
        assert!(lattice_member(&l, &int_vec(&[3, 1])).unwrap());
        assert!(matches!(
            lattice_member(&l, &int_vec(&[3])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn rank_deficient_generators() {
        assert!(matches!(
            lattice_of_columns(&mat(&[&[1, 2], &[2, 4]])),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn quotient_examples() {
        let z2 = lattice_of_columns(&IntMatrix::identity(2)).unwrap();
        let q = quotient(&z2, &mat(&[&[2, 0], &[0, 2]])).unwrap();
        assert_eq!(q.order(), &BigInt::from(4));
        let all: HashSet<_> = q.residues().into_iter().collect();
        assert_eq!(all.len(), 4);
        assert_eq!(
            q.residue_of(&int_vec(&[3, 5])).unwrap(),
            ResidueId(int_vec(&[1, 1]))
        );
        assert!(q.residue_of(&int_vec(&[0, 0])).unwrap().is_identity());
        assert_eq!(
            q.residue_of(&int_vec(&[7, 4])).unwrap(),
            ResidueId(int_vec(&[1, 0]))
        );

        let z = lattice_of_columns(&mat(&[&[1]])).unwrap();
        assert_eq!(quotient(&z, &mat(&[&[2]])).unwrap().order(), &BigInt::from(2));

        let two_z = lattice_of_columns(&mat(&[&[2]])).unwrap();
        assert_eq!(
            quotient(&two_z, &mat(&[&[4]])).unwrap().order(),
            &BigInt::from(2)
        );
    }

    #[test]
    fn quotient_rejects_non_sublattice() {
        let two_z = lattice_of_columns(&mat(&[&[2]])).unwrap();
        assert_eq!(quotient(&two_z, &mat(&[&[3]])), Err(Error::NotSublattice));
        let q = quotient(&two_z, &mat(&[&[4]])).unwrap();
        assert!(matches!(
            q.residue_of(&int_vec(&[1])),
            Err(Error::NotInLattice(_))
        ));
    }

    #[test]
    fn cyclic_quotient_has_single_nontrivial_factor() {
        let z2 = lattice_of_columns(&IntMatrix::identity(2)).unwrap();
        let q = quotient(&z2, &mat(&[&[2, 1], &[1, 3]])).unwrap();
        assert_eq!(q.order(), &BigInt::from(5));
        assert_eq!(q.invariant_factors(), &int_vec(&[1, 5])[..]);
    }

    fn full_rank_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=3, 0usize..=3)
            .prop_flat_map(|(m, extra)| {
                proptest::collection::vec(-5i64..=5, m * (m + extra))
                    .prop_map(move |e| (m, m + extra, e))
            })
            .prop_map(|(m, n, e)| {
                let rows: Vec<Vec<i64>> = (0..m).map(|i| e[i * n..(i + 1) * n].to_vec()).collect();
                IntMatrix::from_rows(&rows).unwrap()
            })
            .prop_filter("full row rank", |a| a.rank() == a.rows())
    }

    proptest! {
        #[test]
        fn lattice_determinant_is_minor_gcd(a in full_rank_matrix()) {
            let l = lattice_of_columns(&a).unwrap();
            let s = minor_summary(&a).unwrap();
            prop_assert_eq!(l.determinant(), &s.gamma);
            for j in 0..a.cols() {
                prop_assert!(l.contains(&a.column(j)).unwrap());
            }
        }

        #[test]
        fn residues_respect_addition(
            a in full_rank_matrix(),
            u in proptest::collection::vec(-6i64..=6, 8),
            v in proptest::collection::vec(-6i64..=6, 8),
        ) {
            let m = a.rows();
            let l = lattice_of_columns(&a).unwrap();
            let mut stretch = IntMatrix::identity(m);
            for i in 0..m {
                stretch[(i, i)] = BigInt::from(i + 2);
            }
            if m > 1 {
                stretch[(0, 1)] = BigInt::from(1);
            }
            let scaled = l.basis().mul(&stretch).unwrap();
            let q = quotient(&l, &scaled).unwrap();
            let pu = l.basis().mul_vec(&int_vec(&u[..m])).unwrap();
            let pv = l.basis().mul_vec(&int_vec(&v[..m])).unwrap();
            let sum: Vec<BigInt> = pu.iter().zip(&pv).map(|(x, y)| x + y).collect();
            let ru = q.residue_of(&pu).unwrap();
            let rv = q.residue_of(&pv).unwrap();
            prop_assert_eq!(q.add(&ru, &rv), q.residue_of(&sum).unwrap());
        }
    }
}
