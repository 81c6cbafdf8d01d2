//! Exact LP solving over `{x >= 0 : Ax = b}`, optimal-basis enumeration and
//! cone membership.

pub(crate) mod simplex;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_linalg::{determinant, IntMatrix, RationalVector};
use simplex::{LinearProgram, Status};

/// Constraint matrix and objective of the parametric family
/// `max{c·z : Az = b, z >= 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    a: IntMatrix,
    c: RationalVector,
    unique_lp_optima: bool,
    bounded_fibers: bool,
}

impl Instance {
    pub fn a(&self) -> &IntMatrix {
        &self.a
    }

    pub fn c(&self) -> &RationalVector {
        &self.c
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Every optimal basis has strictly negative reduced costs, so `LP(b)`
    /// has a unique optimum for every feasible `b`.
    pub fn unique_lp_optima(&self) -> bool {
        self.unique_lp_optima
    }

    /// `{x >= 0 : Ax = 0} = {0}`, i.e. every polyhedron `{Ax = b, x >= 0}` is
    /// bounded.
    pub fn bounded_fibers(&self) -> bool {
        self.bounded_fibers
    }

    /// Objective scaled to integers: `(c·L, L)`.
    pub(crate) fn integer_objective(&self) -> (Vec<BigInt>, BigInt) {
        self.c.scaled_integers()
    }

    pub(crate) fn rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.m()).map(|i| self.a.row(i).to_vec()).collect()
    }

    pub fn objective_value(&self, z: &[BigInt]) -> BigRational {
        self.c.dot_int(z)
    }
}

/// Checks rank and the recession condition `max{c·x : Ax = 0, 0 <= x <= 1} = 0`.
pub fn validate_instance(a: IntMatrix, c: RationalVector) -> Result<Instance> {
    if c.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "objective has {} entries for {} columns",
            c.len(),
            a.cols()
        )));
    }
    let rank = a.rank();
    if rank != a.rows() || a.rows() == 0 {
        return Err(Error::RankDeficient {
            rank,
            rows: a.rows(),
        });
    }
    let n = a.cols();
    let rows: Vec<Vec<BigInt>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    let box_lp = |objective: Vec<BigInt>| LinearProgram {
        rows: rows.clone(),
        rhs: vec![BigInt::zero(); a.rows()],
        objective,
        lower: vec![BigInt::zero(); n],
        upper: vec![Some(BigInt::one()); n],
    };
    let (cz, scale) = c.scaled_integers();
    let rec = simplex::solve(&box_lp(cz.clone()));
    debug_assert_eq!(rec.status, Status::Optimal);
    let rec_value = value_of(&cz, &rec.numerators, &rec.denominator);
    if rec_value.is_positive() {
        return Err(Error::InvalidObjective {
            value: (rec_value / BigRational::from_integer(scale)).to_string(),
        });
    }
    let fiber = simplex::solve(&box_lp(vec![BigInt::one(); n]));
    let bounded_fibers = value_of(&vec![BigInt::one(); n], &fiber.numerators, &fiber.denominator)
        .is_zero();

    let mut inst = Instance {
        a,
        c,
        unique_lp_optima: false,
        bounded_fibers,
    };
    inst.unique_lp_optima = enumerate_optimal_bases(&inst)?
        .iter()
        .all(|b| b.is_unique_optimal);
    Ok(inst)
}

fn value_of(obj: &[BigInt], num: &[BigInt], den: &BigInt) -> BigRational {
    let s: BigInt = obj.iter().zip(num).map(|(c, x)| c * x).sum();
    BigRational::new(s, den.clone())
}

/// An invertible m-column submatrix `B` of `A` with its LP data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisInfo {
    pub columns: Vec<usize>,
    pub nonbasic: Vec<usize>,
    pub inverse: Vec<Vec<BigRational>>,
    /// Signed determinant of `B`.
    pub det: BigInt,
    pub det_abs: BigInt,
    /// `adj(B)`, so `B⁻¹ = adj(B) / det`.
    pub adjugate: IntMatrix,
    /// `c_j − c_B·B⁻¹a_j` for each column in `nonbasic`.
    pub reduced_costs: RationalVector,
    pub is_optimal: bool,
    pub is_unique_optimal: bool,
}

impl BasisInfo {
    pub fn new(inst: &Instance, columns: &[usize]) -> Result<Option<BasisInfo>> {
        let m = inst.m();
        if columns.len() != m {
            return Err(Error::Dimension(format!(
                "basis needs {m} columns, got {}",
                columns.len()
            )));
        }
        let b = inst.a.select_columns(columns);
        let det = determinant(&b)?;
        if det.is_zero() {
            return Ok(None);
        }
        let adjugate = b.adjugate()?;
        let inverse: Vec<Vec<BigRational>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| BigRational::new(adjugate[(i, j)].clone(), det.clone()))
                    .collect()
            })
            .collect();
        let nonbasic: Vec<usize> = (0..inst.n()).filter(|j| !columns.contains(j)).collect();
        let c_b: Vec<BigRational> = columns.iter().map(|&j| inst.c[j].clone()).collect();
        let reduced: Vec<BigRational> = nonbasic
            .iter()
            .map(|&j| {
                let col = inst.a.column(j);
                let y = mat_vec_rat(&inverse, &col);
                &inst.c[j] - c_b.iter().zip(&y).map(|(c, v)| c * v).sum::<BigRational>()
            })
            .collect();
        let is_optimal = reduced.iter().all(|r| !r.is_positive());
        let is_unique_optimal = reduced.iter().all(|r| r.is_negative());
        Ok(Some(BasisInfo {
            columns: columns.to_vec(),
            nonbasic,
            inverse,
            det_abs: det.abs(),
            det,
            adjugate,
            reduced_costs: RationalVector(reduced),
            is_optimal,
            is_unique_optimal,
        }))
    }

    /// Integer numerators of `B⁻¹b` over the positive denominator `det_abs`.
    pub fn scaled_coordinates(&self, b: &[BigInt]) -> Vec<BigInt> {
        let v = self.adjugate.mul_vec(b).expect("dimension checked by caller");
        if self.det.is_negative() {
            v.into_iter().map(|x| -x).collect()
        } else {
            v
        }
    }

    /// `B⁻¹b` exactly.
    pub fn coordinates(&self, b: &[BigInt]) -> Vec<BigRational> {
        self.scaled_coordinates(b)
            .into_iter()
            .map(|x| BigRational::new(x, self.det_abs.clone()))
            .collect()
    }

    /// `max |(B⁻¹A)_ij|`.
    pub fn inverse_times_a_max_abs(&self, inst: &Instance) -> BigRational {
        (0..inst.n())
            .flat_map(|j| self.coordinates(&inst.a.column(j)))
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Basic solution embedded in Rⁿ for right-hand side `b`.
    pub fn vertex(&self, n: usize, b: &[BigInt]) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); n];
        for (&j, v) in self.columns.iter().zip(self.coordinates(b)) {
            x[j] = v;
        }
        x
    }
}

fn mat_vec_rat(m: &[Vec<BigRational>], v: &[BigInt]) -> Vec<BigRational> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .map(|(a, x)| a * BigRational::from_integer(x.clone()))
                .sum()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub vertex: RationalVector,
    pub value: BigRational,
    pub basis: Option<BasisInfo>,
}

fn check_rhs(inst: &Instance, b: &[BigInt]) -> Result<()> {
    if b.len() != inst.m() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            inst.m()
        )));
    }
    Ok(())
}

/// Exact simplex solve of `LP(b)`.
pub fn solve_lp(inst: &Instance, b: &[BigInt]) -> Result<LpSolution> {
    check_rhs(inst, b)?;
    let n = inst.n();
    let (obj, _) = inst.integer_objective();
    let out = simplex::solve(&LinearProgram {
        rows: inst.rows(),
        rhs: b.to_vec(),
        objective: obj,
        lower: vec![BigInt::zero(); n],
        upper: vec![None; n],
    });
    match out.status {
        Status::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            vertex: RationalVector::zeros(0),
            value: BigRational::zero(),
            basis: None,
        }),
        Status::Unbounded => Err(Error::Unbounded),
        Status::Optimal => {
            let vertex: Vec<BigRational> = out
                .numerators
                .iter()
                .map(|x| BigRational::new(x.clone(), out.denominator.clone()))
                .collect();
            let value = inst.c.dot(&vertex);
            let basis = BasisInfo::new(inst, &out.basis)?;
            debug_assert!(basis.as_ref().is_some_and(|bi| bi.is_optimal));
            Ok(LpSolution {
                status: LpStatus::Optimal,
                vertex: RationalVector(vertex),
                value,
                basis,
            })
        }
    }
}

/// All invertible m-subsets of columns with nonpositive reduced costs,
/// in lexicographic order of their column sets.
pub fn enumerate_optimal_bases(inst: &Instance) -> Result<Vec<BasisInfo>> {
    let mut out = Vec::new();
    for cols in (0..inst.n()).combinations(inst.m()) {
        if let Some(info) = BasisInfo::new(inst, &cols)? {
            if info.is_optimal {
                out.push(info);
            }
        }
    }
    Ok(out)
}

/// `B⁻¹b >= 0`.
pub fn cone_member(basis: &BasisInfo, b: &[BigInt]) -> bool {
    b.len() == basis.columns.len()
        && basis
            .scaled_coordinates(b)
            .iter()
            .all(|x| !x.is_negative())
}

/// `b ∈ cone(A)`, decided by a phase-one solve.
pub fn in_cone_of_a(inst: &Instance, b: &[BigInt]) -> Result<bool> {
    check_rhs(inst, b)?;
    let n = inst.n();
    let out = simplex::solve(&LinearProgram {
        rows: inst.rows(),
        rhs: b.to_vec(),
        objective: vec![BigInt::zero(); n],
        lower: vec![BigInt::zero(); n],
        upper: vec![None; n],
    });
    Ok(out.status != Status::Infeasible)
}

/// Every optimal vertex of `LP(b)`, deduplicated, in lexicographic order.
pub fn optimal_vertices(inst: &Instance, b: &[BigInt]) -> Result<Vec<RationalVector>> {
    let sol = solve_lp(inst, b)?;
    if sol.status != LpStatus::Optimal {
        return Ok(Vec::new());
    }
    let mut out: Vec<Vec<BigRational>> = Vec::new();
    for cols in (0..inst.n()).combinations(inst.m()) {
        let Some(info) = BasisInfo::new(inst, &cols)? else {
            continue;
        };
        if !cone_member(&info, b) {
            continue;
        }
        let x = info.vertex(inst.n(), b);
        if inst.c.dot(&x) == sol.value {
            out.push(x);
        }
    }
    out.sort();
    out.dedup();
    Ok(out.into_iter().map(RationalVector).collect())
}
