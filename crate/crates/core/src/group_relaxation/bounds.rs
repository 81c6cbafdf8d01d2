use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use super::{build_residue_table, count_pi, count_pi_inf, count_sigma, ResidueTable};
use crate::error::Result;
use crate::ip_core::Evaluator;

/// β counts of one optimal basis, indexed by `k`.
#[derive(Clone, Debug)]
pub struct BasisBeta {
    pub columns: Vec<usize>,
    pub order: BigInt,
    pub complete: bool,
    pub beta_sigma: Vec<u64>,
    pub beta_pi: Option<Vec<u64>>,
    pub beta_pi_inf: Option<Vec<u64>>,
}

/// `min_i β_i(k) / |Λ/Γⁱ|` over the optimal bases. Residues an incomplete
/// table could not certify are simply not counted.
#[derive(Clone, Debug)]
pub struct CertifiedBounds {
    pub k_max: u64,
    pub per_basis: Vec<BasisBeta>,
    pub complete: bool,
    pub sigma: Vec<BigRational>,
    pub pi: Option<Vec<BigRational>>,
    pub pi_inf: Option<Vec<BigRational>>,
}

/// Closed-form floors at one `k`: `Pr(f <= alpha) >= floor`.
#[derive(Clone, Debug)]
pub struct ClosedFormRow {
    pub k: u64,
    pub sigma_alpha: BigRational,
    /// `min{1, 2^k / γ⁻¹δ}`.
    pub sigma_floor: BigRational,
    pub pi_alpha: BigRational,
    /// `min{1, (k+1) / γ⁻¹δ}`; also the floor for `pi_min`.
    pub pi_floor: BigRational,
    pub pi_inf_alpha: BigRational,
    pub pi_inf_floor: BigRational,
}

/// `c = 0` only: `Pr(σ <= 2m+k) >= min{1, 2^k / γ⁻¹η}`.
#[derive(Clone, Debug)]
pub struct FeasibilityRow {
    pub k: u64,
    pub sigma_alpha: BigRational,
    pub sigma_floor: BigRational,
}

/// Levels at which each function is below the threshold with density one.
#[derive(Clone, Debug)]
pub struct Thresholds {
    /// `m + ⌊log₂ γ⁻¹δ⌋`; σ is an integer, so this is `m + log₂ γ⁻¹δ`.
    pub sigma: BigInt,
    /// `(m+1)(γ⁻¹δ − 1)`, also for `pi_max`.
    pub pi: BigInt,
    pub pi_inf: BigInt,
    /// `((m+1)(√m·‖A‖∞)^m)²`, kept squared so it stays integral.
    pub corollary_squared: BigInt,
}

#[derive(Clone, Debug)]
pub struct TheoreticalBounds {
    pub normalized_delta: BigInt,
    pub normalized_eta: BigInt,
    pub closed_form: Vec<ClosedFormRow>,
    pub feasibility: Option<Vec<FeasibilityRow>>,
    pub thresholds: Thresholds,
    pub certified: CertifiedBounds,
    pub tables: Vec<ResidueTable>,
}

fn ratio_capped(num: BigInt, den: &BigInt) -> BigRational {
    let r = BigRational::new(num, den.clone());
    if r > BigRational::one() {
        BigRational::one()
    } else {
        r
    }
}

/// `⌊log₂ x⌋` for `x >= 1`.
fn floor_log2(x: &BigInt) -> u64 {
    x.bits() - 1
}

pub fn certified_bounds(tables: &[ResidueTable], k_max: u64) -> Result<CertifiedBounds> {
    let unique = tables.iter().all(|t| t.unique_lp);
    let complete = tables.iter().all(|t| t.complete);
    let mut per_basis = Vec::new();
    for t in tables {
        let counts = |f: fn(&ResidueTable, u64) -> u64| (0..=k_max).map(|k| f(t, k)).collect::<Vec<_>>();
        let beta_sigma = counts(count_sigma);
        let beta_pi = unique.then(|| counts(count_pi));
        let beta_pi_inf = unique.then(|| counts(count_pi_inf));
        per_basis.push(BasisBeta {
            columns: t.basis.columns.clone(),
            order: t.order().clone(),
            complete: t.complete,
            beta_sigma,
            beta_pi,
            beta_pi_inf,
        });
    }
    let overall = |pick: &dyn Fn(&BasisBeta) -> Option<&Vec<u64>>| -> Option<Vec<BigRational>> {
        (0..=k_max as usize)
            .map(|k| {
                per_basis
                    .iter()
                    .map(|b| pick(b).map(|v| BigRational::new(v[k].into(), b.order.clone())))
                    .try_fold(BigRational::one(), |acc, x| x.map(|x| if x < acc { x } else { acc }))
            })
            .collect()
    };
    Ok(CertifiedBounds {
        k_max,
        complete,
        sigma: overall(&|b| Some(&b.beta_sigma)).unwrap_or_default(),
        pi: overall(&|b| b.beta_pi.as_ref()),
        pi_inf: overall(&|b| b.beta_pi_inf.as_ref()),
        per_basis,
    })
}

/// Residue tables for every optimal basis plus all closed-form floors for
/// `k = 0..=k_max`.
pub fn theoretical_bounds(eval: &Evaluator, k_max: u64) -> Result<TheoreticalBounds> {
    let inst = eval.instance();
    let minors = eval.minors();
    let m = inst.m();
    let d = minors.normalized_delta();
    let mb = BigRational::from_integer(m.into());
    let dq = BigRational::from_integer(d.clone());
    let two = BigInt::from(2);

    let closed_form = (0..=k_max)
        .map(|k| {
            let kq = BigRational::from_integer(k.into());
            let frac = BigRational::new(k.into(), (k + 1).into());
            ClosedFormRow {
                k,
                sigma_alpha: &mb + &kq,
                sigma_floor: ratio_capped(two.clone().pow(k), &d),
                pi_alpha: &mb * &dq * &frac + &kq,
                pi_floor: ratio_capped(BigInt::from(k + 1), &d),
                pi_inf_alpha: &dq * &frac,
                pi_inf_floor: ratio_capped(BigInt::from(k + 1), &d),
            }
        })
        .collect();

    let eta = minors.normalized_eta();
    let feasibility = inst.c().is_zero().then(|| {
        (0..=k_max)
            .map(|k| FeasibilityRow {
                k,
                sigma_alpha: BigRational::from_integer((2 * m as u64 + k).into()),
                sigma_floor: ratio_capped(two.clone().pow(k), &eta),
            })
            .collect()
    });

    let a_max = inst.a().max_abs();
    let thresholds = Thresholds {
        sigma: BigInt::from(m as u64 + floor_log2(&d)),
        pi: BigInt::from(m + 1) * (&d - 1),
        pi_inf: &d - 1,
        corollary_squared: BigInt::from((m + 1) * (m + 1))
            * BigInt::from(m).pow(m as u32)
            * a_max.pow(2 * m as u32),
    };

    let tables = eval
        .bases()
        .iter()
        .map(|b| build_residue_table(eval, b))
        .collect::<Result<Vec<_>>>()?;
    let certified = certified_bounds(&tables, k_max)?;
    Ok(TheoreticalBounds {
        normalized_delta: d,
        normalized_eta: eta,
        closed_form,
        feasibility,
        thresholds,
        certified,
        tables,
    })
}

impl TheoreticalBounds {
    /// Best floor `p` such that `Pr(f <= alpha) >= p` follows from the bounds
    /// (closed-form, certified, or a density-one threshold).
    pub fn floor_for(&self, kind: crate::ip_core::FunctionKind, alpha: &BigRational) -> BigRational {
        use crate::ip_core::FunctionKind::*;
        let mut best = BigRational::zero();
        let mut take = |cand: &BigRational| {
            if *cand > best {
                best = cand.clone();
            }
        };
        for row in &self.closed_form {
            let k = row.k as usize;
            match kind {
                Sigma => {
                    if row.sigma_alpha <= *alpha {
                        take(&row.sigma_floor);
                        if let Some(c) = self.certified.sigma.get(k) {
                            take(c);
                        }
                    }
                }
                Pi | PiMin => {
                    if row.pi_alpha <= *alpha {
                        take(&row.pi_floor);
                        if let Some(c) = self.certified.pi.as_ref().and_then(|v| v.get(k)) {
                            take(c);
                        }
                    }
                }
                PiInf => {
                    if row.pi_inf_alpha <= *alpha {
                        take(&row.pi_inf_floor);
                        if let Some(c) = self.certified.pi_inf.as_ref().and_then(|v| v.get(k)) {
                            take(c);
                        }
                    }
                }
                PiMax => {}
            }
        }
        if let Some(rows) = &self.feasibility {
            if kind == Sigma {
                for row in rows.iter().filter(|r| r.sigma_alpha <= *alpha) {
                    take(&row.sigma_floor);
                }
            }
        }
        let threshold = match kind {
            Sigma => Some(&self.thresholds.sigma),
            Pi | PiMin | PiMax => Some(&self.thresholds.pi),
            PiInf => Some(&self.thresholds.pi_inf),
        };
        if threshold.is_some_and(|t| BigRational::from_integer(t.clone()) <= *alpha) {
            take(&BigRational::one());
        }
        best
    }
}
