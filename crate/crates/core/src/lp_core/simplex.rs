//! Two-phase primal simplex on an integer-preserving (Bareiss) tableau.
//!
//! The tableau stores integer numerators `T` together with a positive common
//! denominator `d`; the true tableau is `T / d`. A pivot on `(r, s)` replaces
//! every other entry by `(T_ij·T_rs − T_is·T_rj) / d`, which divides exactly,
//! and then sets `d = T_rs`. Entering and leaving variables follow Bland's
//! rule. Arithmetic first runs on overflow-checked `i128` and falls back to
//! `BigInt` if any intermediate leaves that range.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub(crate) trait ExactInt: Clone + Ord + Debug {
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div_exact(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
}

impl ExactInt for i128 {
    fn from_big(v: &BigInt) -> Option<Self> {
        i128::try_from(v).ok()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        debug_assert_eq!(self % o, 0, "inexact Bareiss division");
        self.checked_div(*o)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
}

impl ExactInt for BigInt {
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn one() -> Self {
        BigInt::from(1)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
}

/// `max objective·x  s.t.  rows·x = rhs,  lower <= x <= upper`.
/// All data integral; `lower` finite.
#[derive(Clone, Debug)]
pub(crate) struct LinearProgram {
    pub rows: Vec<Vec<BigInt>>,
    pub rhs: Vec<BigInt>,
    pub objective: Vec<BigInt>,
    pub lower: Vec<BigInt>,
    pub upper: Vec<Option<BigInt>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution `x = numerators / denominator` (denominator positive).
#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub status: Status,
    pub numerators: Vec<BigInt>,
    pub denominator: BigInt,
    /// Structural columns that are basic at the final tableau.
    pub basis: Vec<usize>,
}

impl Outcome {
    fn without_point(status: Status) -> Self {
        Outcome {
            status,
            numerators: Vec::new(),
            denominator: BigInt::from(1),
            basis: Vec::new(),
        }
    }
}

struct Overflow;

type Step<T> = Result<T, Overflow>;

fn ok<T>(v: Option<T>) -> Step<T> {
    v.ok_or(Overflow)
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    d: T,
    basis: Vec<usize>,
    width: usize,
}

impl<T: ExactInt> Tableau<T> {
    fn pivot(&mut self, r: usize, s: usize) -> Step<()> {
        let p = self.rows[r][s].clone();
        let pivot_row = self.rows[r].clone();
        let d = self.d.clone();
        let update = |row: &mut Vec<T>| -> Step<()> {
            let f = row[s].clone();
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                let a = ok(x.mul(&p))?;
                let b = ok(f.mul(pr))?;
                *x = ok(ok(a.sub(&b))?.div_exact(&d))?;
            }
            Ok(())
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                update(row)?;
            }
        }
        update(&mut self.obj)?;
        self.d = p;
        self.basis[r] = s;
        if self.d.is_negative() {
            for row in self.rows.iter_mut().chain(std::iter::once(&mut self.obj)) {
                for x in row.iter_mut() {
                    *x = ok(x.neg())?;
                }
            }
            self.d = ok(self.d.neg())?;
        }
        Ok(())
    }

    /// Runs Bland-rule iterations until optimal (`true`) or unbounded (`false`).
    fn optimize(&mut self, allowed: &[bool]) -> Step<bool> {
        let rhs = self.width;
        loop {
            let Some(s) = (0..self.width).find(|&j| allowed[j] && self.obj[j].is_negative())
            else {
                return Ok(true);
            };
            let mut best: Option<usize> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][s].is_positive() {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(k) => {
                        // rhs_i / a_is  vs  rhs_k / a_ks
                        let lhs = ok(self.rows[i][rhs].mul(&self.rows[k][s]))?;
                        let rhs_v = ok(self.rows[k][rhs].mul(&self.rows[i][s]))?;
                        if lhs < rhs_v || (lhs == rhs_v && self.basis[i] < self.basis[k]) {
                            Some(i)
                        } else {
                            Some(k)
                        }
                    }
                };
            }
            match best {
                Some(r) => self.pivot(r, s)?,
                None => return Ok(false),
            }
        }
    }

    fn set_objective(&mut self, costs: &[T]) -> Step<()> {
        let w = self.width;
        for j in 0..=w {
            let mut acc = if j < w {
                ok(ok(self.d.mul(&costs[j]))?.neg())?
            } else {
                T::zero()
            };
            for (i, row) in self.rows.iter().enumerate() {
                let cb = &costs[self.basis[i]];
                if !cb.is_zero() {
                    acc = ok(acc.add(&ok(cb.mul(&row[j]))?))?;
                }
            }
            self.obj[j] = acc;
        }
        Ok(())
    }
}

fn solve_generic<T: ExactInt>(lp: &LinearProgram) -> Step<Outcome> {
    let n = lp.objective.len();
    let lift = |v: &BigInt| -> Step<T> { ok(T::from_big(v)) };

    let mut eq_rhs = Vec::with_capacity(lp.rows.len());
    for (row, b) in lp.rows.iter().zip(&lp.rhs) {
        let shift: BigInt = row.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
        eq_rhs.push(b - shift);
    }
    let bounded: Vec<usize> = (0..n).filter(|&j| lp.upper[j].is_some()).collect();
    let mut bound_rhs = Vec::with_capacity(bounded.len());
    for &j in &bounded {
        let room = lp.upper[j].as_ref().map(|u| u - &lp.lower[j]).unwrap();
        if Signed::is_negative(&room) {
            return Ok(Outcome::without_point(Status::Infeasible));
        }
        bound_rhs.push(room);
    }

    let n_eq = lp.rows.len();
    let n_slack = bounded.len();
    let slack0 = n;
    let art0 = n + n_slack;
    let width = n + n_slack + n_eq;

    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n_eq + n_slack);
    let mut basis = Vec::with_capacity(n_eq + n_slack);
    for (i, (row, b)) in lp.rows.iter().zip(&eq_rhs).enumerate() {
        let flip = Signed::is_negative(b);
        let mut r = vec![T::zero(); width + 1];
        for j in 0..n {
            let v = if flip { -&row[j] } else { row[j].clone() };
            r[j] = lift(&v)?;
        }
        r[art0 + i] = T::one();
        r[width] = lift(&if flip { -b } else { b.clone() })?;
        rows.push(r);
        basis.push(art0 + i);
    }
    for (k, (&j, room)) in bounded.iter().zip(&bound_rhs).enumerate() {
        let mut r = vec![T::zero(); width + 1];
        r[j] = T::one();
        r[slack0 + k] = T::one();
        r[width] = lift(room)?;
        rows.push(r);
        basis.push(slack0 + k);
    }

    let mut t = Tableau {
        rows,
        obj: vec![T::zero(); width + 1],
        d: T::one(),
        basis,
        width,
    };

    // Phase one: maximize −Σ artificials.
    let minus_one = ok(T::one().neg())?;
    let mut phase1 = vec![T::zero(); width];
    for c in phase1.iter_mut().skip(art0) {
        *c = minus_one.clone();
    }
    t.set_objective(&phase1)?;
    let all = vec![true; width];
    t.optimize(&all)?;
    if t.obj[width].is_negative() {
        return Ok(Outcome::without_point(Status::Infeasible));
    }
    for r in 0..t.rows.len() {
        if t.basis[r] < art0 {
            continue;
        }
        if let Some(s) = (0..art0).find(|&j| !t.rows[r][j].is_zero()) {
            t.pivot(r, s)?;
        }
        // Otherwise the row is redundant; its artificial stays basic at zero.
    }

    // Phase two.
    let mut costs = vec![T::zero(); width];
    for j in 0..n {
        costs[j] = lift(&lp.objective[j])?;
    }
    t.set_objective(&costs)?;
    let allowed: Vec<bool> = (0..width).map(|j| j < art0).collect();
    if !t.optimize(&allowed)? {
        return Ok(Outcome::without_point(Status::Unbounded));
    }

    let d = t.d.to_big();
    let mut numerators: Vec<BigInt> = lp.lower.iter().map(|l| l * &d).collect();
    let mut basis = Vec::new();
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            numerators[bj] += t.rows[i][width].to_big();
            basis.push(bj);
        }
    }
    basis.sort_unstable();
    Ok(Outcome {
        status: Status::Optimal,
        numerators,
        denominator: d,
        basis,
    })
}

pub(crate) fn solve(lp: &LinearProgram) -> Outcome {
    debug_assert!(lp.rows.iter().all(|r| r.len() == lp.objective.len()));
    debug_assert_eq!(lp.lower.len(), lp.objective.len());
    debug_assert_eq!(lp.upper.len(), lp.objective.len());
    match solve_generic::<i128>(lp) {
        Ok(out) => out,
        Err(Overflow) => match solve_generic::<BigInt>(lp) {
            Ok(out) => out,
            Err(Overflow) => unreachable!("BigInt arithmetic cannot overflow"),
        },
    }
}

#[cfg(test)]
pub(crate) fn solve_big(lp: &LinearProgram) -> Outcome {
    match solve_generic::<BigInt>(lp) {
        Ok(out) => out,
        Err(Overflow) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn lp(rows: &[&[i64]], rhs: &[i64], obj: &[i64]) -> LinearProgram {
        let n = obj.len();
        LinearProgram {
            rows: rows.iter().map(|r| big(r)).collect(),
            rhs: big(rhs),
            objective: big(obj),
            lower: vec![BigInt::from(0); n],
            upper: vec![None; n],
        }
    }

    fn point(o: &Outcome) -> Vec<BigRational> {
        o.numerators
            .iter()
            .map(|x| BigRational::new(x.clone(), o.denominator.clone()))
            .collect()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_row_knapsack() {
        let o = solve(&lp(&[&[2, 1]], &[7], &[1, 0]));
        assert_eq!(o.status, Status::Optimal);
        assert_eq!(point(&o), vec![q(7, 2), q(0, 1)]);
        assert_eq!(o.basis, vec![0]);
    }

    #[test]
    fn two_identity_blocks() {
        let o = solve(&lp(&[&[2, 0, 1, 0], &[0, 2, 0, 1]], &[3, 3], &[1, 1, 0, 0]));
        assert_eq!(o.status, Status::Optimal);
        assert_eq!(point(&o), vec![q(3, 2), q(3, 2), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let o = solve(&lp(&[&[2, 0, 1, 0], &[0, 2, 0, 1]], &[-1, 0], &[1, 1, 0, 0]));
        assert_eq!(o.status, Status::Infeasible);
        let o = solve(&lp(&[&[1, -1]], &[0], &[1, 1]));
        assert_eq!(o.status, Status::Unbounded);
    }

    #[test]
    fn bounds_are_respected() {
        let mut p = lp(&[&[2, 1]], &[7], &[1, 0]);
        p.upper[0] = Some(BigInt::from(3));
        let o = solve(&p);
        assert_eq!(point(&o), vec![q(3, 1), q(1, 1)]);
        p.lower[1] = BigInt::from(2);
        let o = solve(&p);
        assert_eq!(point(&o), vec![q(5, 2), q(2, 1)]);
        p.lower[0] = BigInt::from(4);
        assert_eq!(solve(&p).status, Status::Infeasible);
    }

    #[test]
    fn redundant_row_is_tolerated() {
        let o = solve(&lp(&[&[1, 1], &[2, 2]], &[3, 6], &[1, 2]));
        assert_eq!(o.status, Status::Optimal);
        assert_eq!(point(&o), vec![q(0, 1), q(3, 1)]);
    }

    #[test]
    fn bigint_fallback_agrees() {
        let huge = BigInt::from(1u128 << 100);
        let p = LinearProgram {
            rows: vec![vec![BigInt::from(3), BigInt::from(1)]],
            rhs: vec![huge.clone()],
            objective: big(&[1, 0]),
            lower: vec![BigInt::from(0); 2],
            upper: vec![None; 2],
        };
        let a = solve(&p);
        let b = solve_big(&p);
        assert_eq!(point(&a), point(&b));
        assert_eq!(point(&a)[0], BigRational::new(huge, BigInt::from(3)));
    }
}
