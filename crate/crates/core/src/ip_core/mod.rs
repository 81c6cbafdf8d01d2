//! Exact IP solving and the per-right-hand-side functions σ, π, π∞, π^min
//! and π^max.

mod branch_bound;
mod enumerate;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_linalg::{lattice_of_columns, minor_summary, LatticeBasis, MinorSummary, RationalVector};
use crate::lp_core::{cone_member, enumerate_optimal_bases, BasisInfo, Instance};

/// Node cap for branch and bound unless `IPDENSITY_NODE_BUDGET` says otherwise.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

pub fn default_node_budget() -> u64 {
    std::env::var("IPDENSITY_NODE_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    Sigma,
    Pi,
    PiInf,
    PiMin,
    PiMax,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 5] = [
        FunctionKind::Sigma,
        FunctionKind::Pi,
        FunctionKind::PiInf,
        FunctionKind::PiMin,
        FunctionKind::PiMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::Sigma => "sigma",
            FunctionKind::Pi => "pi",
            FunctionKind::PiInf => "pi-inf",
            FunctionKind::PiMin => "pi-min",
            FunctionKind::PiMax => "pi-max",
        }
    }

    /// Needs a single LP optimum per right-hand side.
    pub fn needs_unique_lp(self) -> bool {
        matches!(self, FunctionKind::Pi | FunctionKind::PiInf)
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FunctionKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Invalid(format!("unknown function '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    UpperBound,
}

/// `value == None` encodes +∞ (infeasible right-hand side).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionValue {
    pub kind: FunctionKind,
    pub value: Option<BigRational>,
    pub exactness: Exactness,
}

impl FunctionValue {
    pub fn is_infinite(&self) -> bool {
        self.value.is_none()
    }

    /// `f(b) <= alpha`. Upper bounds count, since the true value is no larger.
    pub fn at_most(&self, alpha: &BigRational) -> bool {
        self.value.as_ref().is_some_and(|v| v <= alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpResult {
    pub status: IpStatus,
    pub value: BigRational,
    /// Empty when infeasible.
    pub witness: Vec<BigInt>,
}

impl IpResult {
    fn infeasible() -> Self {
        IpResult {
            status: IpStatus::Infeasible,
            value: BigRational::zero(),
            witness: Vec::new(),
        }
    }
}

/// Optimal solutions of `IP(b)` with `‖z‖∞ <= box_radius`, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalSet {
    pub solutions: Vec<Vec<BigInt>>,
    pub box_radius: BigInt,
    pub truncated: bool,
}

/// Everything the functions need for one right-hand side.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub ip: IpResult,
    pub lp_value: Option<BigRational>,
    /// Optimal LP vertices in lexicographic order.
    pub lp_vertices: Vec<RationalVector>,
    pub optimal_set: Option<OptimalSet>,
    /// Radius at which π-type minima are guaranteed to be attained.
    pub proximity_radius: Option<BigInt>,
    unique_lp: bool,
    tie_break: bool,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.ip.status == IpStatus::Optimal
    }

    pub fn value(&self, kind: FunctionKind) -> Result<FunctionValue> {
        if kind.needs_unique_lp() && !self.unique_lp && !self.tie_break {
            return Err(Error::NonUniqueLp);
        }
        let set = match (&self.optimal_set, self.is_feasible()) {
            (Some(set), true) => set,
            _ => {
                return Ok(FunctionValue {
                    kind,
                    value: None,
                    exactness: Exactness::Exact,
                })
            }
        };
        let fallback = set.solutions.is_empty();
        let candidates: &[Vec<BigInt>] = if fallback {
            std::slice::from_ref(&self.ip.witness)
        } else {
            &set.solutions
        };
        let pi_exact = !fallback
            && (!set.truncated
                || self
                    .proximity_radius
                    .as_ref()
                    .is_some_and(|r| set.box_radius >= *r));
        let (value, exact) = match kind {
            FunctionKind::Sigma => {
                let s = candidates.iter().map(|z| support(z)).min().unwrap();
                (
                    BigRational::from_integer(s.into()),
                    !fallback && !set.truncated,
                )
            }
            FunctionKind::Pi | FunctionKind::PiInf => {
                let x = &self.lp_vertices[0];
                let norm = if kind == FunctionKind::Pi { l1 } else { linf };
                let v = candidates.iter().map(|z| norm(x, z)).min().unwrap();
                (v, pi_exact)
            }
            FunctionKind::PiMin | FunctionKind::PiMax => {
                let per_vertex = self
                    .lp_vertices
                    .iter()
                    .map(|x| candidates.iter().map(|z| l1(x, z)).min().unwrap());
                let v = if kind == FunctionKind::PiMin {
                    per_vertex.min()
                } else {
                    per_vertex.max()
                };
                (v.unwrap(), pi_exact)
            }
        };
        Ok(FunctionValue {
            kind,
            value: Some(value),
            exactness: if exact {
                Exactness::Exact
            } else {
                Exactness::UpperBound
            },
        })
    }
}

pub fn support(z: &[BigInt]) -> usize {
    z.iter().filter(|v| !v.is_zero()).count()
}

fn l1(x: &RationalVector, z: &[BigInt]) -> BigRational {
    x.iter()
        .zip(z)
        .map(|(a, b)| (a - BigRational::from_integer(b.clone())).abs())
        .sum()
}

fn linf(x: &RationalVector, z: &[BigInt]) -> BigRational {
    x.iter()
        .zip(z)
        .map(|(a, b)| (a - BigRational::from_integer(b.clone())).abs())
        .max()
        .unwrap_or_else(BigRational::zero)
}

/// `m(2m+2)^m·δ`, the proximity bound for π.
pub fn proximity_bound(m: usize, delta: &BigInt) -> BigInt {
    BigInt::from(m) * BigInt::from(2 * m + 2).pow(m as u32) * delta
}

/// `σ <= m + log₂(γ⁻¹·√det(AAᵀ))`, decided as `4^{σ−m}·γ² <= det(AAᵀ)`.
pub fn sparsity_bound_holds(sigma: usize, m: usize, gamma: &BigInt, gram: &BigInt) -> bool {
    if sigma <= m {
        return true;
    }
    BigInt::from(4).pow((sigma - m) as u32) * gamma * gamma <= *gram
}

/// Shared, immutable per-instance data for evaluating many right-hand sides.
#[derive(Clone, Debug)]
pub struct Evaluator {
    inst: Instance,
    bases: Vec<BasisInfo>,
    lattice: LatticeBasis,
    minors: MinorSummary,
    obj: Vec<BigInt>,
    obj_scale: BigInt,
    node_budget: u64,
    box_radius: Option<BigInt>,
    tie_break: bool,
    proximity: BigInt,
    fiber_box: BigInt,
}

impl Evaluator {
    pub fn new(inst: &Instance) -> Result<Self> {
        let bases = enumerate_optimal_bases(inst)?;
        let lattice = lattice_of_columns(inst.a())?;
        let minors = minor_summary(inst.a())?;
        let (obj, obj_scale) = inst.integer_objective();
        let m = inst.m();
        let proximity = proximity_bound(m, &minors.delta);
        let fiber_box = BigInt::from(m)
            * (BigInt::from(2 * m) * inst.a().max_abs() + 1u32).pow(m as u32);
        Ok(Evaluator {
            inst: inst.clone(),
            bases,
            lattice,
            minors,
            obj,
            obj_scale,
            node_budget: default_node_budget(),
            box_radius: None,
            tie_break: false,
            proximity,
            fiber_box,
        })
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    /// Fixed enumeration radius instead of the per-b proximity radius.
    pub fn with_box_radius(mut self, radius: Option<BigInt>) -> Self {
        self.box_radius = radius;
        self
    }

    /// Use the lexicographically smallest optimal LP vertex as `x*(b)` when
    /// LP optima are not unique.
    pub fn with_lexicographic_tie_break(mut self, on: bool) -> Self {
        self.tie_break = on;
        self
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn bases(&self) -> &[BasisInfo] {
        &self.bases
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    pub fn minors(&self) -> &MinorSummary {
        &self.minors
    }

    pub fn node_budget(&self) -> u64 {
        self.node_budget
    }

    pub fn proximity_bound(&self) -> &BigInt {
        &self.proximity
    }

    pub fn lexicographic_tie_break(&self) -> bool {
        self.tie_break
    }

    fn check(&self, b: &[BigInt]) -> Result<()> {
        if b.len() != self.inst.m() {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.inst.m()
            )));
        }
        Ok(())
    }

    /// First optimal basis whose cone contains `b`.
    pub fn covering_basis(&self, b: &[BigInt]) -> Option<&BasisInfo> {
        self.bases.iter().find(|bi| cone_member(bi, b))
    }

    /// `b ∈ Λ ∩ cone(A)`.
    pub fn passes_prefilters(&self, b: &[BigInt]) -> Result<bool> {
        self.check(b)?;
        Ok(self.lattice.contains(b)? && self.covering_basis(b).is_some())
    }

    pub fn solve_ip(&self, b: &[BigInt]) -> Result<IpResult> {
        self.check(b)?;
        if !self.lattice.contains(b)? {
            return Ok(IpResult::infeasible());
        }
        let Some(basis) = self.covering_basis(b) else {
            return Ok(IpResult::infeasible());
        };
        self.solve_covered(basis, b)
    }

    fn solve_covered(&self, basis: &BasisInfo, b: &[BigInt]) -> Result<IpResult> {
        let n = self.inst.n();
        let x = basis.vertex(n, b);
        if x.iter().all(|v| v.is_integer()) {
            let z: Vec<BigInt> = x.iter().map(|v| v.to_integer()).collect();
            return Ok(IpResult {
                status: IpStatus::Optimal,
                value: self.inst.objective_value(&z),
                witness: z,
            });
        }
        let root_upper = if self.inst.bounded_fibers() {
            vec![None; n]
        } else {
            x.iter().map(|v| Some(v.floor().to_integer() + &self.fiber_box)).collect()
        };
        let found = branch_bound::branch_and_bound(
            &self.inst.rows(),
            b,
            &self.obj,
            root_upper,
            self.node_budget,
        )?;
        Ok(match found {
            None => IpResult::infeasible(),
            Some((v, z)) => IpResult {
                status: IpStatus::Optimal,
                value: BigRational::new(v, self.obj_scale.clone()),
                witness: z,
            },
        })
    }

    /// Optimal LP vertices of `LP(b)` for `b` in `cone(A)`, sorted.
    pub fn lp_vertices(&self, b: &[BigInt]) -> Vec<RationalVector> {
        let n = self.inst.n();
        let mut out: Vec<Vec<BigRational>> = self
            .bases
            .iter()
            .filter(|bi| cone_member(bi, b))
            .map(|bi| bi.vertex(n, b))
            .collect();
        out.sort();
        out.dedup();
        out.into_iter().map(RationalVector).collect()
    }

    /// `⌈max ‖x*‖∞⌉ + m(2m+2)^m·δ` over the optimal LP vertices.
    pub fn proximity_radius(&self, vertices: &[RationalVector]) -> BigInt {
        let top = vertices
            .iter()
            .flat_map(|v| v.iter())
            .map(|x| x.ceil().to_integer())
            .max()
            .unwrap_or_else(BigInt::zero);
        top + &self.proximity
    }

    pub fn enumerate_optimal_solutions(&self, b: &[BigInt], radius: &BigInt) -> Result<OptimalSet> {
        let e = self.evaluate_with_radius(b, Some(radius))?;
        e.optimal_set
            .ok_or_else(|| Error::Invalid("IP(b) is infeasible".into()))
    }

    pub fn evaluate(&self, b: &[BigInt]) -> Result<Evaluation> {
        self.evaluate_with_radius(b, self.box_radius.as_ref())
    }

    fn evaluate_with_radius(&self, b: &[BigInt], radius: Option<&BigInt>) -> Result<Evaluation> {
        self.check(b)?;
        let infeasible = || Evaluation {
            ip: IpResult::infeasible(),
            lp_value: None,
            lp_vertices: Vec::new(),
            optimal_set: None,
            proximity_radius: None,
            unique_lp: self.inst.unique_lp_optima(),
            tie_break: self.tie_break,
        };
        if !self.lattice.contains(b)? {
            return Ok(infeasible());
        }
        let Some(basis) = self.covering_basis(b) else {
            return Ok(infeasible());
        };
        let ip = self.solve_covered(basis, b)?;
        let vertices = self.lp_vertices(b);
        let lp_value = self.inst.c().dot(&vertices[0].0);
        if ip.status == IpStatus::Infeasible {
            let mut e = infeasible();
            e.lp_value = Some(lp_value);
            e.lp_vertices = vertices;
            return Ok(e);
        }
        let default_radius = self.proximity_radius(&vertices);
        let r = radius.cloned().unwrap_or_else(|| default_radius.clone());
        let set = enumerate::optimal_face(&self.inst, basis, b, &lp_value, &ip.value, &r);
        Ok(Evaluation {
            ip,
            lp_value: Some(lp_value),
            lp_vertices: vertices,
            optimal_set: Some(set),
            proximity_radius: Some(default_radius),
            unique_lp: self.inst.unique_lp_optima(),
            tie_break: self.tie_break,
        })
    }
}

pub fn solve_ip(inst: &Instance, b: &[BigInt]) -> Result<IpResult> {
    Evaluator::new(inst)?.solve_ip(b)
}

pub fn enumerate_optimal_solutions(inst: &Instance, b: &[BigInt], radius: &BigInt) -> Result<OptimalSet> {
    Evaluator::new(inst)?.enumerate_optimal_solutions(b, radius)
}

pub fn evaluate_function(inst: &Instance, b: &[BigInt], kind: FunctionKind) -> Result<FunctionValue> {
    Evaluator::new(inst)?.evaluate(b)?.value(kind)
}

pub fn sigma(inst: &Instance, b: &[BigInt]) -> Result<FunctionValue> {
    evaluate_function(inst, b, FunctionKind::Sigma)
}

pub fn pi(inst: &Instance, b: &[BigInt]) -> Result<FunctionValue> {
    evaluate_function(inst, b, FunctionKind::Pi)
}

pub fn pi_inf(inst: &Instance, b: &[BigInt]) -> Result<FunctionValue> {
    evaluate_function(inst, b, FunctionKind::PiInf)
}

pub fn pi_min(inst: &Instance, b: &[BigInt]) -> Result<FunctionValue> {
    evaluate_function(inst, b, FunctionKind::PiMin)
}

pub fn pi_max(inst: &Instance, b: &[BigInt]) -> Result<FunctionValue> {
    evaluate_function(inst, b, FunctionKind::PiMax)
}
