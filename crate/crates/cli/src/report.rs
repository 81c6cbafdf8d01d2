//! Report documents (`ipdensity-report/1`) and their CSV flattenings.
//!
//! Verdict-bearing numbers are exact `p/q` strings; `approx` fields are for
//! reading only.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use sha2::{Digest, Sha256};

use ipdensity::density::{DensityReport, GridMode};
use ipdensity::group_relaxation::{ResidueTable, TheoreticalBounds};
use ipdensity::ip_core::Evaluator;

use crate::instance_file::{write, InstanceFile};

pub const SCHEMA: &str = "ipdensity-report/1";

pub fn rat(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn rats(v: &[BigRational]) -> Vec<String> {
    v.iter().map(rat).collect()
}

fn int(x: &BigInt) -> String {
    x.to_string()
}

fn ints(v: &[BigInt]) -> Vec<String> {
    v.iter().map(int).collect()
}

pub fn approx(x: &BigRational) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(p), Some(q)) => p / q,
        _ => f64::NAN,
    }
}

#[derive(Serialize)]
pub struct InstanceSection {
    pub m: usize,
    pub n: usize,
    pub a: Vec<Vec<String>>,
    pub c: Vec<String>,
    /// SHA-256 of the canonical instance text.
    pub digest: String,
    pub unique_lp_optima: bool,
    pub bounded_fibers: bool,
}

#[derive(Serialize)]
pub struct MinorsSection {
    pub delta: String,
    pub gamma: String,
    pub eta: String,
    pub normalized_delta: String,
    pub normalized_eta: String,
    pub nonsingular_minors: usize,
    pub proximity_bound: String,
}

#[derive(Serialize)]
pub struct BasisSection {
    pub columns: Vec<usize>,
    pub det_abs: String,
    pub reduced_costs: Vec<String>,
    pub unique_optimal: bool,
}

#[derive(Serialize)]
pub struct ResidueRow {
    pub residue: Vec<String>,
    pub min_l1: Option<u64>,
    pub min_support: Option<usize>,
    pub shortest: Option<Vec<String>>,
    pub sparsest: Option<Vec<String>>,
}

#[derive(Serialize)]
pub struct ResidueTableSection {
    pub columns: Vec<usize>,
    pub order: String,
    pub invariant_factors: Vec<String>,
    pub complete: bool,
    pub minimal_vectors: usize,
    pub residues: Vec<ResidueRow>,
}

#[derive(Serialize)]
pub struct BasisBetaSection {
    pub columns: Vec<usize>,
    pub order: String,
    pub complete: bool,
    pub beta_sigma: Vec<u64>,
    pub beta_pi: Option<Vec<u64>>,
    pub beta_pi_inf: Option<Vec<u64>>,
}

#[derive(Serialize)]
pub struct CertifiedSection {
    pub k_max: u64,
    pub complete: bool,
    pub sigma: Vec<String>,
    pub pi: Option<Vec<String>>,
    pub pi_inf: Option<Vec<String>>,
    pub per_basis: Vec<BasisBetaSection>,
}

#[derive(Serialize)]
pub struct ClosedFormRowOut {
    pub k: u64,
    pub sigma_alpha: String,
    pub sigma_floor: String,
    pub pi_alpha: String,
    pub pi_floor: String,
    pub pi_inf_alpha: String,
    pub pi_inf_floor: String,
}

#[derive(Serialize)]
pub struct FeasibilityRowOut {
    pub k: u64,
    pub sigma_alpha: String,
    pub sigma_floor: String,
}

#[derive(Serialize)]
pub struct ThresholdsOut {
    pub sigma: String,
    pub pi: String,
    pub pi_inf: String,
    pub corollary_squared: String,
}

#[derive(Serialize)]
pub struct ClosedFormSection {
    pub rows: Vec<ClosedFormRowOut>,
    pub feasibility: Option<Vec<FeasibilityRowOut>>,
    pub density_one_thresholds: ThresholdsOut,
}

#[derive(Serialize)]
pub struct PerT {
    pub t: u64,
    pub points: u64,
    pub feasible_count: u64,
    pub counts: Vec<u64>,
    pub ratios: Vec<String>,
    pub approx: Vec<f64>,
    pub truncation_count: u64,
    pub error_count: u64,
}

#[derive(Serialize)]
pub struct EmpiricalSection {
    pub function: String,
    pub mode: String,
    pub seed: Option<u64>,
    pub alphas: Vec<String>,
    pub slack_constant: String,
    pub per_t: Vec<PerT>,
    pub differences: Vec<Vec<String>>,
}

#[derive(Serialize)]
pub struct VerdictOut {
    pub alpha: String,
    pub t: u64,
    pub empirical: String,
    pub bound: String,
    pub slack: String,
    pub verdict: &'static str,
    pub approx_empirical: f64,
}

#[derive(Serialize)]
pub struct CorollaryOut {
    pub t: u64,
    pub exceeding: u64,
    pub feasible: u64,
    pub fraction: String,
}

#[derive(Serialize)]
pub struct WorstCaseOut {
    pub checked: u64,
    pub sparsity_violations: u64,
    pub sparsity_unverified: u64,
    pub proximity_violations: u64,
    pub corollary: Vec<CorollaryOut>,
    pub verdict: &'static str,
}

#[derive(Serialize)]
pub struct ErrorOut {
    pub b: Option<Vec<String>>,
    pub message: String,
}

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: &'static str,
    pub status: &'static str,
    pub instance: InstanceSection,
    pub minors: MinorsSection,
    pub bases: Vec<BasisSection>,
    pub residue_tables: Vec<ResidueTableSection>,
    pub certified_bounds: CertifiedSection,
    pub closed_form_bounds: ClosedFormSection,
    pub empirical: Option<EmpiricalSection>,
    pub verdicts: Vec<VerdictOut>,
    pub worst_case: Option<WorstCaseOut>,
    pub errors: Vec<ErrorOut>,
}

pub fn instance_section(file: &InstanceFile, eval: &Evaluator) -> InstanceSection {
    let a = &file.a;
    let digest = Sha256::digest(write(file).as_bytes());
    InstanceSection {
        m: a.rows(),
        n: a.cols(),
        a: (0..a.rows()).map(|i| ints(a.row(i))).collect(),
        c: rats(&file.c.0),
        digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
        unique_lp_optima: eval.instance().unique_lp_optima(),
        bounded_fibers: eval.instance().bounded_fibers(),
    }
}

pub fn minors_section(eval: &Evaluator) -> MinorsSection {
    let s = eval.minors();
    MinorsSection {
        delta: int(&s.delta),
        gamma: int(&s.gamma),
        eta: int(&s.eta),
        normalized_delta: int(&s.normalized_delta()),
        normalized_eta: int(&s.normalized_eta()),
        nonsingular_minors: s.count_nonsingular,
        proximity_bound: int(eval.proximity_bound()),
    }
}

pub fn bases_section(eval: &Evaluator) -> Vec<BasisSection> {
    eval.bases()
        .iter()
        .map(|b| BasisSection {
            columns: b.columns.clone(),
            det_abs: int(&b.det_abs),
            reduced_costs: rats(&b.reduced_costs.0),
            unique_optimal: b.is_unique_optimal,
        })
        .collect()
}

fn table_section(t: &ResidueTable) -> ResidueTableSection {
    ResidueTableSection {
        columns: t.basis.columns.clone(),
        order: int(t.order()),
        invariant_factors: ints(t.group.invariant_factors()),
        complete: t.complete,
        minimal_vectors: t.vectors.len(),
        residues: t
            .records
            .iter()
            .map(|r| ResidueRow {
                residue: ints(&r.residue.0),
                min_l1: r.min_l1,
                min_support: r.min_support,
                shortest: r.by_l1.as_ref().map(|v| ints(&v.z)),
                sparsest: r.by_support.as_ref().map(|v| ints(&v.z)),
            })
            .collect(),
    }
}

fn certified_section(b: &TheoreticalBounds) -> CertifiedSection {
    let c = &b.certified;
    CertifiedSection {
        k_max: c.k_max,
        complete: c.complete,
        sigma: rats(&c.sigma),
        pi: c.pi.as_deref().map(rats),
        pi_inf: c.pi_inf.as_deref().map(rats),
        per_basis: c
            .per_basis
            .iter()
            .map(|p| BasisBetaSection {
                columns: p.columns.clone(),
                order: int(&p.order),
                complete: p.complete,
                beta_sigma: p.beta_sigma.clone(),
                beta_pi: p.beta_pi.clone(),
                beta_pi_inf: p.beta_pi_inf.clone(),
            })
            .collect(),
    }
}

fn closed_form_section(b: &TheoreticalBounds) -> ClosedFormSection {
    ClosedFormSection {
        rows: b
            .closed_form
            .iter()
            .map(|r| ClosedFormRowOut {
                k: r.k,
                sigma_alpha: rat(&r.sigma_alpha),
                sigma_floor: rat(&r.sigma_floor),
                pi_alpha: rat(&r.pi_alpha),
                pi_floor: rat(&r.pi_floor),
                pi_inf_alpha: rat(&r.pi_inf_alpha),
                pi_inf_floor: rat(&r.pi_inf_floor),
            })
            .collect(),
        feasibility: b.feasibility.as_ref().map(|rows| {
            rows.iter()
                .map(|r| FeasibilityRowOut {
                    k: r.k,
                    sigma_alpha: rat(&r.sigma_alpha),
                    sigma_floor: rat(&r.sigma_floor),
                })
                .collect()
        }),
        density_one_thresholds: ThresholdsOut {
            sigma: int(&b.thresholds.sigma),
            pi: int(&b.thresholds.pi),
            pi_inf: int(&b.thresholds.pi_inf),
            corollary_squared: int(&b.thresholds.corollary_squared),
        },
    }
}

/// Everything that does not depend on a grid.
pub fn bounds_report(file: &InstanceFile, eval: &Evaluator, bounds: &TheoreticalBounds, command: &'static str) -> Report {
    Report {
        schema: SCHEMA,
        command,
        status: "ok",
        instance: instance_section(file, eval),
        minors: minors_section(eval),
        bases: bases_section(eval),
        residue_tables: bounds.tables.iter().map(table_section).collect(),
        certified_bounds: certified_section(bounds),
        closed_form_bounds: closed_form_section(bounds),
        empirical: None,
        verdicts: Vec::new(),
        worst_case: None,
        errors: Vec::new(),
    }
}

pub fn attach_density(report: &mut Report, d: &DensityReport, mode: GridMode) {
    let (mode_name, seed) = match mode {
        GridMode::Exhaustive => ("exhaustive".to_string(), None),
        GridMode::Sampled { count, seed } => (format!("sample:{count}"), Some(seed)),
    };
    report.empirical = Some(EmpiricalSection {
        function: d.kind.name().to_string(),
        mode: mode_name,
        seed,
        alphas: rats(&d.alphas),
        slack_constant: rat(&d.slack_constant),
        per_t: d
            .densities
            .iter()
            .map(|e| PerT {
                t: e.t,
                points: e.points,
                feasible_count: e.feasible_count,
                counts: e.counts.clone(),
                ratios: rats(&e.ratios),
                approx: e.ratios.iter().map(approx).collect(),
                truncation_count: e.truncation_count,
                error_count: e.error_count,
            })
            .collect(),
        differences: d.differences.iter().map(|v| rats(v)).collect(),
    });
    report.verdicts = d
        .verdicts
        .iter()
        .map(|v| VerdictOut {
            alpha: rat(&v.alpha),
            t: v.t,
            empirical: rat(&v.empirical),
            bound: rat(&v.bound),
            slack: rat(&v.slack),
            verdict: if v.holds { "bound_holds" } else { "bound_violated" },
            approx_empirical: approx(&v.empirical),
        })
        .collect();
    let w = &d.worst_case;
    report.worst_case = Some(WorstCaseOut {
        checked: w.checked,
        sparsity_violations: w.sparsity_violations,
        sparsity_unverified: w.sparsity_unverified,
        proximity_violations: w.proximity_violations,
        corollary: w
            .corollary_exceed
            .iter()
            .zip(&d.densities)
            .map(|(&(t, exceeding), e)| CorollaryOut {
                t,
                exceeding,
                feasible: e.feasible_count,
                fraction: rat(&BigRational::new(exceeding.into(), e.feasible_count.max(1).into())),
            })
            .collect(),
        verdict: if w.violated() { "violated" } else { "holds" },
    });
    report.errors = d
        .errors
        .iter()
        .map(|(b, e)| ErrorOut {
            b: Some(ints(b)),
            message: e.to_string(),
        })
        .collect();
}

pub const VERDICT_CSV_HEADER: &str = "function,alpha,t,points,feasible_count,count,ratio,bound,slack,verdict,ratio_approx";

/// One row per `(α, t)`.
pub fn verdicts_csv(d: &DensityReport) -> String {
    let mut out = String::from(VERDICT_CSV_HEADER);
    out.push('\n');
    for (i, alpha) in d.alphas.iter().enumerate() {
        for e in &d.densities {
            let v = d
                .verdicts
                .iter()
                .find(|v| v.t == e.t && v.alpha == *alpha)
                .expect("one verdict per (alpha, t)");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                d.kind.name(),
                rat(alpha),
                e.t,
                e.points,
                e.feasible_count,
                e.counts[i],
                rat(&e.ratios[i]),
                rat(&v.bound),
                rat(&v.slack),
                if v.holds { "bound_holds" } else { "bound_violated" },
                approx(&e.ratios[i]),
            ));
        }
    }
    out
}

/// `t` against the ratio for each α, for plotting.
pub fn plot_csv(d: &DensityReport) -> String {
    let mut out = String::from("t");
    for a in &d.alphas {
        out.push_str(&format!(",alpha={}", rat(a)));
    }
    out.push('\n');
    for e in &d.densities {
        out.push_str(&e.t.to_string());
        for r in &e.ratios {
            out.push_str(&format!(",{}", approx(r)));
        }
        out.push('\n');
    }
    out
}

/// Closed-form and certified floors per `k`.
pub fn bounds_csv(b: &TheoreticalBounds) -> String {
    let mut out = String::from(
        "k,sigma_alpha,sigma_floor,certified_sigma,pi_alpha,pi_floor,certified_pi,pi_inf_alpha,pi_inf_floor,certified_pi_inf\n",
    );
    let get = |v: &Option<Vec<BigRational>>, k: usize| v.as_ref().map(|v| rat(&v[k])).unwrap_or_default();
    for r in &b.closed_form {
        let k = r.k as usize;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.k,
            rat(&r.sigma_alpha),
            rat(&r.sigma_floor),
            rat(&b.certified.sigma[k]),
            rat(&r.pi_alpha),
            rat(&r.pi_floor),
            get(&b.certified.pi, k),
            rat(&r.pi_inf_alpha),
            rat(&r.pi_inf_floor),
            get(&b.certified.pi_inf, k),
        ));
    }
    out
}
