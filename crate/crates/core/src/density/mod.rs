//! Finite-box frequencies `Pr_t(f <= α)` over feasible right-hand sides and
//! their comparison with the density floors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub mod generate;

use crate::error::{Error, Result};
use crate::exact_linalg::{gram_determinant, LatticeBasis};
use crate::group_relaxation::TheoreticalBounds;
use crate::ip_core::{sparsity_bound_holds, Evaluator, Exactness, FunctionKind, FunctionValue};

/// Largest box that exhaustive mode will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridMode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub t: u64,
    pub mode: GridMode,
    pub kind: FunctionKind,
    pub alphas: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDensity {
    pub t: u64,
    /// Points looked at: the whole box, or the sample size.
    pub points: u64,
    pub feasible_count: u64,
    pub counts: Vec<u64>,
    /// `counts[i] / feasible_count`; zero when nothing is feasible.
    pub ratios: Vec<BigRational>,
    pub truncation_count: u64,
    pub error_count: u64,
}

/// One evaluated right-hand side.
#[derive(Clone, Debug)]
struct Point {
    norm: u64,
    value: FunctionValue,
    sigma: FunctionValue,
    /// π, or π^max when LP optima are not unique.
    distance: Option<FunctionValue>,
}

/// Per-point outcomes of one box or sample, reusable across `t <= t_max`.
#[derive(Clone, Debug)]
pub struct GridData {
    pub t_max: u64,
    pub kind: FunctionKind,
    pub mode: GridMode,
    m: usize,
    points: Vec<Point>,
    /// `(norm, b, error)` for points whose evaluation failed.
    pub errors: Vec<(u64, Vec<BigInt>, Error)>,
    sampled_norms: Vec<u64>,
}

fn box_size(t: u64, m: usize) -> Option<u64> {
    (2 * t + 1).checked_pow(m as u32)
}

fn decode(mut idx: u64, t: u64, m: usize) -> Vec<BigInt> {
    let side = 2 * t + 1;
    (0..m)
        .map(|_| {
            let v = (idx % side) as i64 - t as i64;
            idx /= side;
            BigInt::from(v)
        })
        .collect()
}

fn norm_inf(b: &[BigInt]) -> u64 {
    b.iter().map(|x| x.abs().to_u64().unwrap_or(u64::MAX)).max().unwrap_or(0)
}

/// Points of a sample of `count` uniform draws from `[-t, t]^m`; the same
/// seed always gives the same list.
pub fn sample_points(t: u64, m: usize, count: u64, seed: u64) -> Vec<Vec<BigInt>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ti = t as i64;
    (0..count)
        .map(|_| (0..m).map(|_| BigInt::from(rng.gen_range(-ti..=ti))).collect())
        .collect()
}

fn distance_kind(eval: &Evaluator) -> FunctionKind {
    if eval.instance().unique_lp_optima() {
        FunctionKind::Pi
    } else {
        FunctionKind::PiMax
    }
}

fn evaluate_point(eval: &Evaluator, kind: FunctionKind, b: &[BigInt]) -> Result<Option<Point>> {
    if !eval.passes_prefilters(b)? {
        return Ok(None);
    }
    let e = eval.evaluate(b)?;
    if !e.is_feasible() {
        return Ok(None);
    }
    let sigma = e.value(FunctionKind::Sigma)?;
    let distance = Some(e.value(distance_kind(eval))?);
    Ok(Some(Point {
        norm: norm_inf(b),
        value: e.value(kind)?,
        sigma,
        distance,
    }))
}

/// Evaluates `f` on every point of `[-t_max, t_max]^m` (or on a seeded
/// sample) in parallel.
pub fn evaluate_grid(eval: &Evaluator, kind: FunctionKind, t_max: u64, mode: GridMode) -> Result<GridData> {
    let m = eval.instance().m();
    if kind.needs_unique_lp() && !eval.instance().unique_lp_optima() && !eval.lexicographic_tie_break() {
        return Err(Error::NonUniqueLp);
    }
    let run = |b: Vec<BigInt>| -> (Vec<BigInt>, Result<Option<Point>>) {
        let r = evaluate_point(eval, kind, &b);
        (b, r)
    };
    let (outcomes, sampled_norms): (Vec<_>, Vec<u64>) = match mode {
        GridMode::Exhaustive => {
            let size = box_size(t_max, m)
                .filter(|&s| s <= EXHAUSTIVE_LIMIT)
                .ok_or_else(|| Error::GridTooLarge {
                    points: format!("(2·{t_max}+1)^{m}"),
                    limit: EXHAUSTIVE_LIMIT,
                })?;
            let out = (0..size)
                .into_par_iter()
                .map(|i| run(decode(i, t_max, m)))
                .collect();
            (out, Vec::new())
        }
        GridMode::Sampled { count, seed } => {
            let pts = sample_points(t_max, m, count, seed);
            let norms = pts.iter().map(|b| norm_inf(b)).collect();
            (pts.into_par_iter().map(run).collect(), norms)
        }
    };
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for (b, r) in outcomes {
        match r {
            Ok(Some(p)) => points.push(p),
            Ok(None) => {}
            Err(e) => errors.push((norm_inf(&b), b, e)),
        }
    }
    Ok(GridData {
        t_max,
        kind,
        mode,
        m,
        points,
        errors,
        sampled_norms,
    })
}

impl GridData {
    /// Frequencies restricted to `‖b‖∞ <= t`.
    pub fn tally(&self, t: u64, alphas: &[BigRational]) -> EmpiricalDensity {
        let inside: Vec<&Point> = self.points.iter().filter(|p| p.norm <= t).collect();
        let feasible = inside.len() as u64;
        let counts: Vec<u64> = alphas
            .iter()
            .map(|a| inside.iter().filter(|p| p.value.at_most(a)).count() as u64)
            .collect();
        let ratios = counts
            .iter()
            .map(|&c| {
                if feasible == 0 {
                    BigRational::zero()
                } else {
                    BigRational::new(c.into(), feasible.into())
                }
            })
            .collect();
        let points = match self.mode {
            GridMode::Exhaustive => box_size(t, self.m).unwrap_or(u64::MAX),
            GridMode::Sampled { .. } => self.sampled_norms.iter().filter(|&&n| n <= t).count() as u64,
        };
        EmpiricalDensity {
            t,
            points,
            feasible_count: feasible,
            counts,
            ratios,
            truncation_count: inside
                .iter()
                .filter(|p| p.value.exactness == Exactness::UpperBound)
                .count() as u64,
            error_count: self.errors.iter().filter(|(n, _, _)| *n <= t).count() as u64,
        }
    }
}

/// Successive differences of the ratios along a sweep, one list per α.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sweep {
    pub densities: Vec<EmpiricalDensity>,
    pub differences: Vec<Vec<BigRational>>,
}

pub fn empirical_density(eval: &Evaluator, spec: &GridSpec) -> Result<EmpiricalDensity> {
    let data = evaluate_grid(eval, spec.kind, spec.t, spec.mode)?;
    Ok(data.tally(spec.t, &spec.alphas))
}

/// One density per `t` in increasing `t_list`. Exhaustive mode evaluates the
/// largest box once; sampled mode draws a fresh sample for each `t`.
pub fn density_sweep(
    eval: &Evaluator,
    kind: FunctionKind,
    alphas: &[BigRational],
    t_list: &[u64],
    mode: GridMode,
) -> Result<Sweep> {
    let (densities, _) = sweep_with_data(eval, kind, alphas, t_list, mode)?;
    Ok(sweep_from(densities, alphas.len()))
}

fn sweep_from(densities: Vec<EmpiricalDensity>, r: usize) -> Sweep {
    let differences = (0..r)
        .map(|i| {
            densities
                .windows(2)
                .map(|w| &w[1].ratios[i] - &w[0].ratios[i])
                .collect()
        })
        .collect();
    Sweep {
        densities,
        differences,
    }
}

fn sweep_with_data(
    eval: &Evaluator,
    kind: FunctionKind,
    alphas: &[BigRational],
    t_list: &[u64],
    mode: GridMode,
) -> Result<(Vec<EmpiricalDensity>, Vec<GridData>)> {
    if t_list.is_empty() || t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("t values must be increasing and nonempty".into()));
    }
    match mode {
        GridMode::Exhaustive => {
            let data = evaluate_grid(eval, kind, *t_list.last().unwrap(), mode)?;
            let ds = t_list.iter().map(|&t| data.tally(t, alphas)).collect();
            Ok((ds, vec![data]))
        }
        GridMode::Sampled { count, seed } => {
            let mut ds = Vec::new();
            let mut all = Vec::new();
            for &t in t_list {
                let data = evaluate_grid(eval, kind, t, GridMode::Sampled { count, seed: seed ^ t })?;
                ds.push(data.tally(t, alphas));
                all.push(data);
            }
            Ok((ds, all))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub alpha: BigRational,
    pub t: u64,
    pub empirical: BigRational,
    pub bound: BigRational,
    pub slack: BigRational,
    pub holds: bool,
}

/// Worst-case checks over every feasible point evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorstCase {
    pub checked: u64,
    /// `σ(b) > m + log₂(γ⁻¹√det(AAᵀ))` with σ exact.
    pub sparsity_violations: u64,
    /// Upper bounds on σ above the limit, so the check is inconclusive.
    pub sparsity_unverified: u64,
    /// `π(b) > m(2m+2)^m·δ` (π^max when LP optima are not unique).
    pub proximity_violations: u64,
    /// Per `t`: feasible points with `π(b) > (m+1)(√m·‖A‖∞)^m`.
    pub corollary_exceed: Vec<(u64, u64)>,
}

impl WorstCase {
    pub fn violated(&self) -> bool {
        self.sparsity_violations > 0 || self.proximity_violations > 0
    }
}

#[derive(Clone, Debug)]
pub struct DensityReport {
    pub kind: FunctionKind,
    pub alphas: Vec<BigRational>,
    pub densities: Vec<EmpiricalDensity>,
    pub differences: Vec<Vec<BigRational>>,
    pub slack_constant: BigRational,
    pub verdicts: Vec<Verdict>,
    pub worst_case: WorstCase,
    pub errors: Vec<(Vec<BigInt>, Error)>,
}

impl DensityReport {
    pub fn bounds_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }

    pub fn passed(&self) -> bool {
        self.bounds_hold() && !self.worst_case.violated()
    }
}

/// `4·m·(number of optimal bases)`.
pub fn default_slack_constant(eval: &Evaluator) -> BigRational {
    BigRational::from_integer(BigInt::from(4 * eval.instance().m() * eval.bases().len()))
}

pub fn slack(constant: &BigRational, t: u64) -> BigRational {
    constant / BigRational::from_integer(t.into())
}

/// `Pr_t >= bound − slack(t)` for every `(α, t)`.
pub fn compare(
    bounds: &TheoreticalBounds,
    kind: FunctionKind,
    alphas: &[BigRational],
    densities: &[EmpiricalDensity],
    slack_constant: &BigRational,
) -> Vec<Verdict> {
    let mut out = Vec::new();
    for (i, alpha) in alphas.iter().enumerate() {
        let bound = bounds.floor_for(kind, alpha);
        for d in densities {
            let s = slack(slack_constant, d.t);
            let empirical = d.ratios[i].clone();
            let holds = d.feasible_count == 0 || empirical >= &bound - &s;
            out.push(Verdict {
                alpha: alpha.clone(),
                t: d.t,
                empirical,
                bound: bound.clone(),
                slack: s,
                holds,
            });
        }
    }
    out
}

fn worst_case(eval: &Evaluator, bounds: &TheoreticalBounds, data: &[GridData], t_list: &[u64]) -> Result<WorstCase> {
    let m = eval.instance().m();
    let gamma = &eval.minors().gamma;
    let gram = gram_determinant(eval.instance().a())?;
    let prox = BigRational::from_integer(eval.proximity_bound().clone());
    let cor = BigRational::from_integer(bounds.thresholds.corollary_squared.clone());
    let mut wc = WorstCase {
        checked: 0,
        sparsity_violations: 0,
        sparsity_unverified: 0,
        proximity_violations: 0,
        corollary_exceed: Vec::new(),
    };
    for d in data {
        for p in &d.points {
            wc.checked += 1;
            let s = p.sigma.value.as_ref().unwrap().to_integer().to_usize().unwrap_or(usize::MAX);
            if !sparsity_bound_holds(s, m, gamma, &gram) {
                if p.sigma.exactness == Exactness::Exact {
                    wc.sparsity_violations += 1;
                } else {
                    wc.sparsity_unverified += 1;
                }
            }
            if let Some(v) = p.distance.as_ref().and_then(|d| d.value.as_ref()) {
                if *v > prox && p.distance.as_ref().unwrap().exactness == Exactness::Exact {
                    wc.proximity_violations += 1;
                }
            }
        }
    }
    let last = data.last();
    for &t in t_list {
        let src = if data.len() == 1 {
            last
        } else {
            data.iter().find(|d| d.t_max == t)
        };
        let count = src.map_or(0, |d| {
            d.points
                .iter()
                .filter(|p| p.norm <= t)
                .filter(|p| {
                    p.distance
                        .as_ref()
                        .and_then(|d| d.value.as_ref())
                        .is_some_and(|v| v * v > cor)
                })
                .count() as u64
        });
        wc.corollary_exceed.push((t, count));
    }
    Ok(wc)
}

/// Full pipeline: evaluate, tally per `t`, compare against the floors, and
/// run the worst-case checks.
pub fn density_report(
    eval: &Evaluator,
    bounds: &TheoreticalBounds,
    kind: FunctionKind,
    alphas: &[BigRational],
    t_list: &[u64],
    mode: GridMode,
    slack_constant: Option<BigRational>,
) -> Result<DensityReport> {
    let (densities, data) = sweep_with_data(eval, kind, alphas, t_list, mode)?;
    let slack_constant = slack_constant.unwrap_or_else(|| default_slack_constant(eval));
    let verdicts = compare(bounds, kind, alphas, &densities, &slack_constant);
    let worst_case = worst_case(eval, bounds, &data, t_list)?;
    let errors = data
        .into_iter()
        .flat_map(|d| d.errors.into_iter().map(|(_, b, e)| (b, e)))
        .collect();
    let sweep = sweep_from(densities, alphas.len());
    Ok(DensityReport {
        kind,
        alphas: alphas.to_vec(),
        densities: sweep.densities,
        differences: sweep.differences,
        slack_constant,
        verdicts,
        worst_case,
        errors,
    })
}

/// `|L ∩ [−t, t]^m|·det(L) / (2t)^m`, which tends to 1.
pub fn lattice_point_count_check(l: &LatticeBasis, t: u64) -> Result<BigRational> {
    let m = l.dim();
    if m > 2 || t == 0 {
        return Err(Error::Invalid("lattice point count check needs m <= 2 and t >= 1".into()));
    }
    let size = box_size(t, m).unwrap();
    let mut count = 0u64;
    for i in 0..size {
        if l.contains(&decode(i, t, m))? {
            count += 1;
        }
    }
    let vol = BigInt::from(2 * t).pow(m as u32);
    Ok(BigRational::new(BigInt::from(count) * l.determinant(), vol))
}
