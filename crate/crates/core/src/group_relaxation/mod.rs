//! Residue tables over `Λ/Γ` for an optimal basis `B`, the certified β
//! counts built from them, and the closed-form density floors.

mod bounds;

pub use bounds::{
    certified_bounds, theoretical_bounds, BasisBeta, CertifiedBounds, ClosedFormRow,
    FeasibilityRow, TheoreticalBounds, Thresholds,
};

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact_linalg::{quotient, IntMatrix, LatticeBasis, QuotientGroup, ResidueId};
use crate::ip_core::{Evaluator, IpStatus};
use crate::lp_core::BasisInfo;

/// `{b ∈ Λ : B⁻¹b >= 3δ·1}`.
#[derive(Clone, Debug)]
pub struct DeepRegion {
    pub basis: BasisInfo,
    /// `B·(3δ·1)`.
    pub threshold_vector: Vec<BigInt>,
    shift: BigInt,
}

impl DeepRegion {
    pub fn new(a: &IntMatrix, basis: &BasisInfo, delta: &BigInt) -> Self {
        let shift = BigInt::from(3) * delta;
        let threshold_vector = basis_times_constant(a, basis, &shift);
        DeepRegion {
            basis: basis.clone(),
            threshold_vector,
            shift,
        }
    }

    pub fn contains(&self, lattice: &LatticeBasis, b: &[BigInt]) -> Result<bool> {
        if !lattice.contains(b)? {
            return Ok(false);
        }
        let floor = &self.shift * &self.basis.det_abs;
        Ok(self
            .basis
            .scaled_coordinates(b)
            .iter()
            .all(|x| *x >= floor))
    }
}

fn basis_times_constant(a: &IntMatrix, basis: &BasisInfo, k: &BigInt) -> Vec<BigInt> {
    (0..a.rows())
        .map(|i| basis.columns.iter().map(|&j| &a[(i, j)] * k).sum())
        .collect()
}

/// An irreducible nonnegative vector supported on the nonbasic columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalVector {
    pub z: Vec<BigInt>,
    pub residue: ResidueId,
    pub l1: u64,
    pub support_size: usize,
    /// Its basic extension is optimal at a deep right-hand side.
    pub certified_optimal: bool,
}

/// `b = Az + B·(4δ·1)`.
pub fn deep_representative(a: &IntMatrix, basis: &BasisInfo, delta: &BigInt, z: &[BigInt]) -> Vec<BigInt> {
    let az = a.mul_vec(z).expect("vector length matches columns");
    let shift = basis_times_constant(a, basis, &(BigInt::from(4) * delta));
    az.iter().zip(shift).map(|(x, y)| x + y).collect()
}

#[derive(Clone, Debug)]
pub struct ResidueRecord {
    pub residue: ResidueId,
    pub min_l1: Option<u64>,
    pub min_support: Option<usize>,
    /// First certified vector (by ‖·‖₁, then lexicographically) attaining `min_l1`.
    pub by_l1: Option<MinimalVector>,
    pub by_support: Option<MinimalVector>,
}

#[derive(Clone, Debug)]
pub struct ResidueTable {
    pub basis: BasisInfo,
    pub group: QuotientGroup,
    /// Indexed by `group.index_of`.
    pub records: Vec<ResidueRecord>,
    /// Every irreducible vector found, in ‖·‖₁ then lexicographic order.
    pub vectors: Vec<MinimalVector>,
    pub complete: bool,
    pub m: usize,
    pub delta: BigInt,
    pub gamma: BigInt,
    pub unique_lp: bool,
}

impl ResidueTable {
    /// `|Λ/Γ| = γ⁻¹|det B|`.
    pub fn order(&self) -> &BigInt {
        self.group.order()
    }

    pub fn missing(&self) -> usize {
        self.records.iter().filter(|r| r.min_l1.is_none()).count()
    }

    fn require_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::IncompleteTable {
                missing: self.missing(),
            })
        }
    }
}

/// Irreducible vectors by breadth-first search in ‖·‖₁, each certified by an
/// exact IP solve at its deep representative, then closed under taking
/// sub-vectors.
pub fn build_residue_table(eval: &Evaluator, basis: &BasisInfo) -> Result<ResidueTable> {
    let inst = eval.instance();
    let a = inst.a();
    let n = inst.n();
    let delta = eval.minors().delta.clone();
    let bmat = a.select_columns(&basis.columns);
    let group = quotient(eval.lattice(), &bmat)?;
    let order = group
        .order()
        .to_usize()
        .ok_or_else(|| Error::Invalid("quotient group too large to tabulate".into()))?;
    let col_res: Vec<ResidueId> = basis
        .nonbasic
        .iter()
        .map(|&j| group.residue_of(&a.column(j)))
        .collect::<Result<_>>()?;

    // z is stored by its nonbasic coordinates
    let mut found: Vec<(Vec<u64>, ResidueId)> = vec![(vec![0; basis.nonbasic.len()], group.identity())];
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    index.insert(found[0].0.clone(), 0);
    let mut level = vec![0usize];
    for _ in 1..order {
        let mut next: Vec<Vec<u64>> = Vec::new();
        for &p in &level {
            for k in 0..col_res.len() {
                let mut z = found[p].0.clone();
                z[k] += 1;
                next.push(z);
            }
        }
        next.sort();
        next.dedup();
        let mut new_level = Vec::new();
        for z in next {
            let down_ok = (0..z.len()).filter(|&k| z[k] > 0).all(|k| {
                let mut w = z.clone();
                w[k] -= 1;
                index.contains_key(&w)
            });
            if !down_ok {
                continue;
            }
            let k0 = z.iter().position(|&v| v > 0).unwrap();
            let mut w = z.clone();
            w[k0] -= 1;
            let r = group.add(&found[index[&w]].1, &col_res[k0]);
            if r.is_identity() {
                continue;
            }
            index.insert(z.clone(), found.len());
            new_level.push(found.len());
            found.push((z, r));
        }
        if new_level.is_empty() {
            break;
        }
        level = new_level;
    }

    let full = |short: &[u64]| -> Vec<BigInt> {
        let mut z = vec![BigInt::zero(); n];
        for (&j, &v) in basis.nonbasic.iter().zip(short) {
            z[j] = BigInt::from(v);
        }
        z
    };
    let c = inst.c();
    let c_shift: BigRational = basis
        .columns
        .iter()
        .map(|&j| &c[j] * BigRational::from_integer(BigInt::from(4) * &delta))
        .sum();
    let mut certified = vec![false; found.len()];
    for p in (0..found.len()).rev() {
        if certified[p] {
            continue;
        }
        let z = full(&found[p].0);
        let b = deep_representative(a, basis, &delta, &z);
        let ip = eval.solve_ip(&b)?;
        let candidate = &c_shift + c.dot_int(&z);
        if ip.status == IpStatus::Optimal && ip.value == candidate {
            mark_down(&found[p].0, &index, &mut certified);
        }
    }

    let mut records: Vec<ResidueRecord> = group
        .residues()
        .into_iter()
        .map(|residue| ResidueRecord {
            residue,
            min_l1: None,
            min_support: None,
            by_l1: None,
            by_support: None,
        })
        .collect();
    let vectors: Vec<MinimalVector> = found
        .iter()
        .zip(&certified)
        .map(|((short, r), &ok)| MinimalVector {
            z: full(short),
            residue: r.clone(),
            l1: short.iter().sum(),
            support_size: short.iter().filter(|&&v| v > 0).count(),
            certified_optimal: ok,
        })
        .collect();
    for v in vectors.iter().filter(|v| v.certified_optimal) {
        let rec = &mut records[group.index_of(&v.residue)];
        if rec.min_l1.map_or(true, |l| v.l1 < l) {
            rec.min_l1 = Some(v.l1);
            rec.by_l1 = Some(v.clone());
        }
        if rec.min_support.map_or(true, |s| v.support_size < s) {
            rec.min_support = Some(v.support_size);
            rec.by_support = Some(v.clone());
        }
    }
    let complete = records.iter().all(|r| r.min_l1.is_some());
    Ok(ResidueTable {
        basis: basis.clone(),
        group,
        records,
        vectors,
        complete,
        m: inst.m(),
        delta,
        gamma: eval.minors().gamma.clone(),
        unique_lp: inst.unique_lp_optima(),
    })
}

fn mark_down(z: &[u64], index: &HashMap<Vec<u64>, usize>, certified: &mut [bool]) {
    let p = index[z];
    if certified[p] {
        return;
    }
    certified[p] = true;
    for k in 0..z.len() {
        if z[k] > 0 {
            let mut w = z.to_vec();
            w[k] -= 1;
            mark_down(&w, index, certified);
        }
    }
}

/// Residues whose minimal certified support is at most `k`.
pub fn certified_beta_sigma(table: &ResidueTable, k: u64) -> Result<u64> {
    table.require_complete()?;
    Ok(count_sigma(table, k))
}

pub(crate) fn count_sigma(table: &ResidueTable, k: u64) -> u64 {
    table
        .records
        .iter()
        .filter(|r| r.min_support.is_some_and(|s| s as u64 <= k))
        .count() as u64
}

fn pi_ready(table: &ResidueTable) -> Result<()> {
    table.require_complete()?;
    if !table.unique_lp {
        return Err(Error::NonUniqueLp);
    }
    Ok(())
}

/// Residues `g` whose shortest certified vector satisfies
/// `m·(δ/|det B|)·‖z‖₁ + ‖z‖₁ <= m·γ⁻¹δ·k/(k+1) + k`.
pub fn certified_beta_pi(table: &ResidueTable, k: u64) -> Result<u64> {
    pi_ready(table)?;
    Ok(count_pi(table, k))
}

pub(crate) fn count_pi(table: &ResidueTable, k: u64) -> u64 {
    let m = BigRational::from_integer(table.m.into());
    let ratio = BigRational::new(table.delta.clone(), table.basis.det_abs.clone());
    let rhs = &m * normalized_delta(table) * frac_k(k) + BigRational::from_integer(k.into());
    count_by_l1(table, |l| &m * &ratio * l + l <= rhs)
}

/// Residues `g` whose shortest certified vector satisfies
/// `(δ/|det B|)·‖z‖₁ <= γ⁻¹δ·k/(k+1)`.
pub fn certified_beta_pi_inf(table: &ResidueTable, k: u64) -> Result<u64> {
    pi_ready(table)?;
    Ok(count_pi_inf(table, k))
}

pub(crate) fn count_pi_inf(table: &ResidueTable, k: u64) -> u64 {
    let ratio = BigRational::new(table.delta.clone(), table.basis.det_abs.clone());
    let rhs = normalized_delta(table) * frac_k(k);
    count_by_l1(table, |l| &ratio * l <= rhs)
}

fn normalized_delta(table: &ResidueTable) -> BigRational {
    BigRational::new(table.delta.clone(), table.gamma.clone())
}

fn frac_k(k: u64) -> BigRational {
    BigRational::new(k.into(), (k + 1).into())
}

fn count_by_l1(table: &ResidueTable, ok: impl Fn(&BigRational) -> bool) -> u64 {
    table
        .records
        .iter()
        .filter(|r| {
            r.min_l1
                .is_some_and(|l| ok(&BigRational::from_integer(l.into())))
        })
        .count() as u64
}

/// `‖B⁻¹Az‖∞` exactly.
pub fn basis_coordinates_norm(a: &IntMatrix, basis: &BasisInfo, z: &[BigInt]) -> BigRational {
    let az = a.mul_vec(z).expect("vector length matches columns");
    basis
        .coordinates(&az)
        .into_iter()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(BigRational::zero)
}
