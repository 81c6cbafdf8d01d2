//! Lattice points of the optimal face, searched in the nonbasic coordinates
//! of an optimal basis covering `b`.
//!
//! For `z` feasible, `c·z = LP(b) − w·z_N` with `w = −reduced costs >= 0`,
//! so optimal points are exactly the `z_N >= 0` with `w·z_N = LP(b) − IP(b)`
//! whose basic completion `B⁻¹(b − N z_N)` is a nonnegative integer vector.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::OptimalSet;
use crate::lp_core::simplex::{self, LinearProgram, Status};
use crate::lp_core::{BasisInfo, Instance};

struct Search<'a> {
    order: Vec<usize>,
    weights: Vec<BigInt>,
    bounds: Vec<BigInt>,
    /// `sign(det)·adj(B)·a_j` for each position in `order`.
    shifts: Vec<Vec<BigInt>>,
    /// `sure_nonneg[pos][i]`: every column at `order[pos..]` has a
    /// nonnegative entry in row `i`, so row `i` can only decrease.
    sure_nonneg: Vec<Vec<bool>>,
    /// First position with zero weight.
    zero_from: usize,
    basis: &'a BasisInfo,
    n: usize,
    radius: &'a BigInt,
    found: Vec<Vec<BigInt>>,
    clipped: bool,
}

impl Search<'_> {
    fn run(&mut self, pos: usize, gap: &BigInt, coords: &[BigInt], z_n: &mut Vec<BigInt>) {
        if pos == self.zero_from && !gap.is_zero() {
            return;
        }
        for (i, s) in coords.iter().enumerate() {
            if s.is_negative() && self.sure_nonneg[pos][i] {
                return;
            }
        }
        if pos == self.order.len() {
            self.leaf(coords, z_n);
            return;
        }
        let w = self.weights[pos].clone();
        let mut k = BigInt::zero();
        let mut rem = gap.clone();
        let mut cur = coords.to_vec();
        loop {
            z_n.push(k.clone());
            self.run(pos + 1, &rem, &cur, z_n);
            z_n.pop();
            k += 1;
            if k > self.bounds[pos] {
                break;
            }
            rem -= &w;
            if rem.is_negative() {
                break;
            }
            for (c, d) in cur.iter_mut().zip(&self.shifts[pos]) {
                *c -= d;
            }
        }
    }

    fn leaf(&mut self, coords: &[BigInt], z_n: &[BigInt]) {
        let mut z = vec![BigInt::zero(); self.n];
        for (&j, v) in self.basis.columns.iter().zip(coords) {
            let (q, r) = v.div_rem(&self.basis.det_abs);
            if !r.is_zero() || q.is_negative() {
                return;
            }
            z[j] = q;
        }
        for (&j, v) in self.order.iter().zip(z_n) {
            z[j] = v.clone();
        }
        if z.iter().any(|v| v > self.radius) {
            self.clipped = true;
            return;
        }
        self.found.push(z);
    }
}

/// Largest `z_j` over `{Az = b, z >= 0, c·z = value}`; `None` if unbounded.
fn face_extent(inst: &Instance, b: &[BigInt], value: &BigRational, j: usize) -> Option<BigInt> {
    let (obj, scale) = inst.integer_objective();
    let v = value * BigRational::from_integer(scale);
    debug_assert!(v.is_integer());
    let mut rows = inst.rows();
    rows.push(obj);
    let mut rhs = b.to_vec();
    rhs.push(v.to_integer());
    let n = inst.n();
    let mut target = vec![BigInt::zero(); n];
    target[j] = BigInt::one();
    let out = simplex::solve(&LinearProgram {
        rows,
        rhs,
        objective: target,
        lower: vec![BigInt::zero(); n],
        upper: vec![None; n],
    });
    match out.status {
        Status::Optimal => Some(out.numerators[j].div_floor(&out.denominator)),
        Status::Unbounded => None,
        Status::Infeasible => Some(BigInt::zero()),
    }
}

pub(crate) fn optimal_face(
    inst: &Instance,
    basis: &BasisInfo,
    b: &[BigInt],
    lp_value: &BigRational,
    ip_value: &BigRational,
    radius: &BigInt,
) -> OptimalSet {
    let gap = lp_value - ip_value;
    let costs: Vec<BigRational> = basis.reduced_costs.iter().map(|r| -r).collect();
    let scale = costs
        .iter()
        .chain(std::iter::once(&gap))
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scaled = |q: &BigRational| (q * BigRational::from_integer(scale.clone())).to_integer();
    let g = scaled(&gap);

    let mut positive = Vec::new();
    let mut zero = Vec::new();
    for (k, &j) in basis.nonbasic.iter().enumerate() {
        let w = scaled(&costs[k]);
        if w.is_zero() {
            zero.push((j, w));
        } else {
            positive.push((j, w));
        }
    }
    let zero_from = positive.len();
    let mut truncated = false;
    let mut order = Vec::new();
    let mut weights = Vec::new();
    let mut bounds = Vec::new();
    for (j, w) in positive.into_iter().chain(zero) {
        let natural = if w.is_zero() {
            face_extent(inst, b, ip_value, j)
        } else {
            Some(&g / &w)
        };
        let bound = match natural {
            Some(nat) if nat <= *radius => nat,
            _ => {
                truncated = true;
                radius.clone()
            }
        };
        order.push(j);
        weights.push(w);
        bounds.push(bound);
    }
    let shifts: Vec<Vec<BigInt>> = order
        .iter()
        .map(|&j| basis.scaled_coordinates(&inst.a().column(j)))
        .collect();
    let m = inst.m();
    let mut sure_nonneg = vec![vec![true; m]; order.len() + 1];
    for pos in (0..order.len()).rev() {
        for i in 0..m {
            sure_nonneg[pos][i] = sure_nonneg[pos + 1][i] && !shifts[pos][i].is_negative();
        }
    }
    let mut search = Search {
        order,
        weights,
        bounds,
        shifts,
        sure_nonneg,
        zero_from,
        basis,
        n: inst.n(),
        radius,
        found: Vec::new(),
        clipped: false,
    };
    let start = basis.scaled_coordinates(b);
    search.run(0, &g, &start, &mut Vec::new());
    let mut solutions = search.found;
    solutions.sort();
    OptimalSet {
        solutions,
        box_radius: radius.clone(),
        truncated: truncated || search.clipped,
    }
}
