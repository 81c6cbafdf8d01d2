//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::Instant;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ipdensity::density::generate::{random_instances, InstanceShape};
use ipdensity::density::{density_report, DensityReport, GridMode, WorstCase};
use ipdensity::exact_linalg::{int_vec, lattice_of_columns, IntMatrix, RationalVector};
use ipdensity::group_relaxation::{
    basis_coordinates_norm, build_residue_table, certified_beta_pi, certified_beta_pi_inf,
    certified_beta_sigma, theoretical_bounds, DeepRegion, MinimalVector,
};
use ipdensity::ip_core::{Evaluator, FunctionKind, IpStatus};
use ipdensity::lp_core::{validate_instance, BasisInfo, Instance};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn qi(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn approx(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

fn line(id: u32, ok: bool, detail: String) -> bool {
    println!("criterion {id}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn two_i_i(m: usize) -> Instance {
    let rows: Vec<Vec<i64>> = (0..m)
        .map(|i| {
            (0..2 * m)
                .map(|j| match j {
                    j if j == i => 2,
                    j if j == m + i => 1,
                    _ => 0,
                })
                .collect()
        })
        .collect();
    let c = (0..2 * m).map(|j| if j < m { q(1, 1) } else { q(0, 1) }).collect();
    validate_instance(IntMatrix::from_rows(&rows).unwrap(), RationalVector(c)).unwrap()
}

#[derive(Default)]
struct WorstTotals {
    checked: u64,
    sparsity: u64,
    sparsity_unverified: u64,
    proximity: u64,
    corollary: u64,
    feasible: u64,
}

impl WorstTotals {
    fn add(&mut self, wc: &WorstCase, feasible_at_largest_t: u64) {
        self.checked += wc.checked;
        self.sparsity += wc.sparsity_violations;
        self.sparsity_unverified += wc.sparsity_unverified;
        self.proximity += wc.proximity_violations;
        self.corollary += wc.corollary_exceed.last().map_or(0, |x| x.1);
        self.feasible += feasible_at_largest_t;
    }

    fn absorb(&mut self, r: &DensityReport) {
        let feas = r.densities.last().map_or(0, |d| d.feasible_count);
        self.add(&r.worst_case, feas);
    }
}

/// Box-frequency limit `2^-m Σ_{i<=k} C(m, i)` for `[2I, I]`.
fn binomial_limit(m: usize, k: usize) -> BigRational {
    let s: u64 = (0..=k).map(|i| (0..i).fold(1u64, |acc, j| acc * (m - j) as u64 / (j + 1) as u64)).sum();
    BigRational::new(s.into(), (1u64 << m).into())
}

fn criterion_1(totals: &mut WorstTotals) -> bool {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, t, tol) in [(2usize, 200u64, q(1, 50)), (3, 60, q(1, 20))] {
        let inst = two_i_i(m);
        let e = Evaluator::new(&inst).unwrap();
        let bounds = theoretical_bounds(&e, m as u64).unwrap();
        let alphas: Vec<BigRational> = (0..=m).map(|k| q((m + k) as i64, 1)).collect();
        let start = Instant::now();
        let r = density_report(&e, &bounds, FunctionKind::Sigma, &alphas, &[t], GridMode::Exhaustive, None).unwrap();
        let secs = start.elapsed().as_secs_f64();
        totals.absorb(&r);
        let d = &r.densities[0];
        let mut got = Vec::new();
        for k in 0..=m {
            let target = binomial_limit(m, k);
            ok &= (&d.ratios[k] - &target).abs() <= tol;
            got.push(format!("{:.4}~{}", approx(&d.ratios[k]), target));
        }
        ok &= secs <= 300.0 && r.errors.is_empty() && d.truncation_count == 0;
        parts.push(format!("m={m} t={t} [{}] {secs:.1}s", got.join(", ")));
    }
    line(1, ok, parts.join("; "))
}

fn ceil_log2(d: &BigInt) -> u64 {
    let bits = d.bits();
    if (d - 1u32).bits() < bits { bits - 1 } else { bits }
}

fn battery(unique: bool) -> Vec<Instance> {
    let shape = InstanceShape {
        max_rows: 2,
        max_cols: 5,
        max_entry: 3,
        unique_lp: unique,
    };
    random_instances(if unique { 2024 } else { 1964 }, 20, &shape)
}

const BATTERY_T: u64 = 60;

fn criterion_2(totals: &mut WorstTotals) -> bool {
    let insts = battery(false);
    let mut checks = 0;
    let mut violations = 0;
    let mut certified_violations = 0;
    for inst in &insts {
        let e = Evaluator::new(inst).unwrap();
        let d = e.minors().normalized_delta();
        let kmax = ceil_log2(&d);
        let bounds = theoretical_bounds(&e, kmax).unwrap();
        let m = inst.m() as i64;
        let alphas: Vec<BigRational> = (0..=kmax).map(|k| q(m + k as i64, 1)).collect();
        let r = density_report(&e, &bounds, FunctionKind::Sigma, &alphas, &[BATTERY_T], GridMode::Exhaustive, None)
            .unwrap();
        totals.absorb(&r);
        let dens = &r.densities[0];
        let slack = &r.verdicts[0].slack;
        for k in 0..=kmax as usize {
            let floor = std::cmp::min(q(1, 1), BigRational::new(BigInt::from(1u64 << k), d.clone()));
            checks += 1;
            if dens.ratios[k] < floor - slack {
                violations += 1;
            }
        }
        certified_violations += r.verdicts.iter().filter(|v| !v.holds).count();
        violations += r.errors.len();
    }
    line(
        2,
        insts.len() == 20 && violations == 0 && certified_violations == 0,
        format!(
            "{} instances, {checks} (k) checks, {violations} closed-form violations, {certified_violations} certified-floor violations",
            insts.len()
        ),
    )
}

fn criterion_3(totals: &mut WorstTotals) -> bool {
    let insts = battery(true);
    let mut checks = 0;
    let mut violations = 0;
    let mut certified_violations = 0;
    for inst in &insts {
        let e = Evaluator::new(inst).unwrap();
        let d = e.minors().normalized_delta();
        let di = d.to_i64().unwrap();
        let m = inst.m() as i64;
        let bounds = theoretical_bounds(&e, (di - 1) as u64).unwrap();
        let frac = |k: i64| q(k, k + 1);
        let pi_alphas: Vec<BigRational> = (0..di)
            .map(|k| q(m * di, 1) * frac(k) + q(k, 1))
            .chain([q((m + 1) * (di - 1), 1)])
            .collect();
        let inf_alphas: Vec<BigRational> = (0..di).map(|k| q(di, 1) * frac(k)).chain([q(di - 1, 1)]).collect();
        let floors: Vec<BigRational> = (0..di)
            .map(|k| std::cmp::min(q(1, 1), q(k + 1, di)))
            .chain([q(1, 1)])
            .collect();
        for (kind, alphas) in [(FunctionKind::Pi, &pi_alphas), (FunctionKind::PiInf, &inf_alphas)] {
            let r = density_report(&e, &bounds, kind, alphas, &[BATTERY_T], GridMode::Exhaustive, None).unwrap();
            totals.absorb(&r);
            let dens = &r.densities[0];
            let slack = &r.verdicts[0].slack;
            for (ratio, floor) in dens.ratios.iter().zip(&floors) {
                checks += 1;
                if *ratio < floor - slack {
                    violations += 1;
                }
            }
            certified_violations += r.verdicts.iter().filter(|v| !v.holds).count();
            violations += r.errors.len();
        }
    }
    line(
        3,
        insts.len() == 20 && violations == 0 && certified_violations == 0,
        format!(
            "{} instances, {checks} checks incl. density-one levels, {violations} closed-form violations, {certified_violations} certified-floor violations",
            insts.len()
        ),
    )
}

fn criterion_4(t: &WorstTotals) -> bool {
    line(
        4,
        t.checked > 0 && t.sparsity == 0 && t.sparsity_unverified == 0 && t.proximity == 0 && t.corollary == 0,
        format!(
            "{} feasible b checked; sparsity violations {} (unverified {}), proximity violations {}, corollary exceedances {}/{}",
            t.checked, t.sparsity, t.sparsity_unverified, t.proximity, t.corollary, t.feasible
        ),
    )
}

/// Distinct classes of `Λ/BZ^m` among lattice points of `[0, |det B|)^m`.
fn brute_force_order(e: &Evaluator, basis: &BasisInfo) -> usize {
    let m = e.instance().m();
    let d: i64 = basis.det_abs.clone().try_into().unwrap();
    let mut reps: Vec<Vec<BigInt>> = Vec::new();
    for p in (0..m).map(|_| 0..d).multi_cartesian_product() {
        let b = int_vec(&p);
        if !e.lattice().contains(&b).unwrap() {
            continue;
        }
        let fresh = reps.iter().all(|r| {
            let diff: Vec<BigInt> = b.iter().zip(r).map(|(x, y)| x - y).collect();
            basis
                .scaled_coordinates(&diff)
                .iter()
                .any(|x| !(x % &basis.det_abs).is_zero())
        });
        if fresh {
            reps.push(b);
        }
    }
    reps.len()
}

fn criterion_5() -> bool {
    let shape = InstanceShape {
        max_rows: 2,
        max_cols: 4,
        max_entry: 2,
        unique_lp: false,
    };
    let insts = random_instances(5, 1000, &shape);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut failures: Vec<String> = Vec::new();
    let mut counts = [0u64; 6];
    for (idx, inst) in insts.iter().enumerate() {
        let mut fail = |what: &str| failures.push(format!("#{idx} {what}"));
        let e = Evaluator::new(inst).unwrap();
        let a = inst.a();
        let delta = e.minors().delta.clone();
        let gamma = e.minors().gamma.clone();
        let norm_bound = qi(&delta) / qi(&gamma);

        counts[0] += 1;
        if *lattice_of_columns(a).unwrap().determinant() != gamma {
            fail("det(Λ) != γ");
        }
        let mut tables = Vec::new();
        for basis in e.bases() {
            let t = build_residue_table(&e, basis).unwrap();
            counts[1] += 1;
            if !t.complete
                || *t.order() != &basis.det_abs / &gamma
                || BigInt::from(brute_force_order(&e, basis)) != *t.order()
            {
                fail("quotient order");
            }
            let order = qi(t.order());
            for v in &t.vectors {
                counts[2] += 1;
                if qi(&v.l1.into()) >= order
                    || basis_coordinates_norm(a, basis, &v.z) >= norm_bound
                    || basis.columns.iter().any(|&j| !v.z[j].is_zero())
                {
                    fail("minimal vector norms");
                }
            }
            for rec in &t.records {
                counts[3] += 1;
                let z = &rec.by_support.as_ref().unwrap().z;
                let supp: Vec<usize> = (0..z.len()).filter(|&j| !z[j].is_zero()).collect();
                let mut seen = HashSet::new();
                for subset in supp.iter().powerset() {
                    let mut w = vec![BigInt::zero(); z.len()];
                    for &&j in &subset {
                        w[j] = z[j].clone();
                    }
                    if !seen.insert(t.group.residue_of(&a.mul_vec(&w).unwrap()).unwrap()) {
                        fail("support subsets share a residue");
                    }
                }
            }
            for k in 0..8u64 {
                counts[4] += 1;
                let floor_s = std::cmp::min(t.order().clone(), BigInt::from(1u64 << k));
                if BigInt::from(certified_beta_sigma(&t, k).unwrap()) < floor_s {
                    fail("β_σ floor");
                }
                if inst.unique_lp_optima() {
                    let floor_p = std::cmp::min(t.order().clone(), BigInt::from(k + 1));
                    if BigInt::from(certified_beta_pi(&t, k).unwrap()) < floor_p
                        || BigInt::from(certified_beta_pi_inf(&t, k).unwrap()) < floor_p
                    {
                        fail("β_π floor");
                    }
                }
            }
            tables.push(t);
        }
        // extension optimality on sampled (z, w, b)
        for _ in 0..50 {
            counts[5] += 1;
            let t = &tables[rng.gen_range(0..tables.len())];
            let basis = &t.basis;
            let certified: Vec<&MinimalVector> = t.vectors.iter().filter(|v| v.certified_optimal).collect();
            let z = &certified[rng.gen_range(0..certified.len())].z;
            let w: Vec<BigInt> = z
                .iter()
                .map(|x| BigInt::from(rng.gen_range(0..=x.to_i64().unwrap())))
                .collect();
            let y: Vec<BigInt> = (0..inst.m()).map(|_| BigInt::from(4) * &delta + rng.gen_range(0..8)).collect();
            let bmat = a.select_columns(&basis.columns);
            let b: Vec<BigInt> = a
                .mul_vec(&w)
                .unwrap()
                .iter()
                .zip(bmat.mul_vec(&y).unwrap())
                .map(|(x, s)| x + s)
                .collect();
            let mut ext = w.clone();
            for (&j, yj) in basis.columns.iter().zip(&y) {
                ext[j] = yj.clone();
            }
            let deep = DeepRegion::new(a, basis, &delta);
            if !deep.contains(e.lattice(), &b).unwrap() || e.solve_ip(&b).unwrap().value != inst.objective_value(&ext) {
                fail("extension not optimal");
            }
        }
    }
    let ok = insts.len() == 1000 && failures.is_empty();
    let detail = format!(
        "{} instances, {} bases, {} minimal vectors, {} residues, {} β checks, {} extension triples, {} failures{}",
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        counts[4],
        counts[5],
        failures.len(),
        failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
    );
    line(5, ok, detail)
}

/// Every `z >= 0` with `Az = b`, bounded by a positive first row.
fn fiber(a: &[Vec<i64>], b: &[i64]) -> Vec<Vec<i64>> {
    fn rec(a: &[Vec<i64>], b: &[i64], j: usize, z: &mut Vec<i64>, left: i64, out: &mut Vec<Vec<i64>>) {
        let n = a[0].len();
        if j == n {
            if (0..a.len()).all(|i| (0..n).map(|k| a[i][k] * z[k]).sum::<i64>() == b[i]) {
                out.push(z.clone());
            }
            return;
        }
        let mut v = 0;
        while v * a[0][j] <= left {
            z[j] = v;
            rec(a, b, j + 1, z, left - v * a[0][j], out);
            v += 1;
        }
        z[j] = 0;
    }
    let mut out = Vec::new();
    if b[0] >= 0 {
        rec(a, b, 0, &mut vec![0; a[0].len()], b[0], &mut out);
    }
    out
}

/// Optimal LP vertices by enumerating basic feasible solutions.
fn lp_vertices(a: &IntMatrix, c: &[BigRational], b: &[BigInt]) -> Vec<Vec<BigRational>> {
    let (m, n) = (a.rows(), a.cols());
    let mut best: Option<BigRational> = None;
    let mut verts: Vec<Vec<BigRational>> = Vec::new();
    for cols in (0..n).combinations(m) {
        let Some(inv) = a.select_columns(&cols).inverse().unwrap() else {
            continue;
        };
        let xb: Vec<BigRational> = inv.iter().map(|row| row.iter().zip(b).map(|(r, bi)| r * qi(bi)).sum()).collect();
        if xb.iter().any(|x| x.is_negative()) {
            continue;
        }
        let mut x = vec![BigRational::zero(); n];
        for (&j, v) in cols.iter().zip(xb) {
            x[j] = v;
        }
        let val: BigRational = x.iter().zip(c).map(|(p, q)| p * q).sum();
        match &best {
            Some(bv) if val < *bv => {}
            Some(bv) if val == *bv => {
                if !verts.contains(&x) {
                    verts.push(x);
                }
            }
            _ => {
                best = Some(val);
                verts = vec![x];
            }
        }
    }
    verts
}

fn tiny_instances() -> Vec<(Vec<Vec<i64>>, Instance)> {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut out = Vec::new();
    while out.len() < 10 {
        let m = 1 + out.len() % 2;
        let n = rng.gen_range(m + 1..=4);
        let rows: Vec<Vec<i64>> = (0..m)
            .map(|i| {
                (0..n)
                    .map(|_| if i == 0 { rng.gen_range(1..=3) } else { rng.gen_range(-2..=2) })
                    .collect()
            })
            .collect();
        let c: Vec<BigRational> = (0..n).map(|_| q(rng.gen_range(-2..=2), 1)).collect();
        if let Ok(inst) = validate_instance(IntMatrix::from_rows(&rows).unwrap(), RationalVector(c)) {
            out.push((rows, inst));
        }
    }
    out
}

fn criterion_6() -> bool {
    let mut points = 0u64;
    let mut mismatches: Vec<String> = Vec::new();
    for (idx, (rows, inst)) in tiny_instances().iter().enumerate() {
        let e = Evaluator::new(inst).unwrap();
        let c = &inst.c().0;
        let m = inst.m();
        for p in (0..m).map(|_| -15i64..=15).multi_cartesian_product() {
            points += 1;
            let b = int_vec(&p);
            let zs = fiber(rows, &p);
            let value = |z: &[i64]| -> BigRational { z.iter().zip(c).map(|(&x, ci)| ci * q(x, 1)).sum() };
            let ip = e.solve_ip(&b).unwrap();
            let best = zs.iter().map(|z| value(z)).max();
            let mut bad = |what: &str| mismatches.push(format!("#{idx} b={p:?} {what}"));
            match &best {
                None => {
                    if ip.status != IpStatus::Infeasible {
                        bad("feasibility");
                    }
                    continue;
                }
                Some(v) => {
                    let witness_ok = inst.a().mul_vec(&ip.witness).unwrap() == b
                        && ip.witness.iter().all(|x| !x.is_negative());
                    if ip.status != IpStatus::Optimal || ip.value != *v || !witness_ok {
                        bad("IP value");
                    }
                }
            }
            let best = best.unwrap();
            let opt: Vec<&Vec<i64>> = zs.iter().filter(|z| value(z) == best).collect();
            let ev = e.evaluate(&b).unwrap();
            let set = ev.optimal_set.as_ref().unwrap();
            let mut expect: Vec<Vec<BigInt>> = opt.iter().map(|z| int_vec(z)).collect();
            expect.sort();
            let mut got = set.solutions.clone();
            got.sort();
            if got != expect || set.truncated {
                bad("optimal set");
            }
            let sigma = opt.iter().map(|z| z.iter().filter(|&&x| x != 0).count()).min().unwrap();
            let verts = lp_vertices(inst.a(), c, &b);
            let dist = |v: &[BigRational], l1: bool| -> BigRational {
                opt.iter()
                    .map(|z| {
                        let d = z.iter().zip(v).map(|(&x, y)| (q(x, 1) - y).abs());
                        if l1 {
                            d.sum()
                        } else {
                            d.max().unwrap()
                        }
                    })
                    .min()
                    .unwrap()
            };
            let mut expected = vec![
                (FunctionKind::Sigma, q(sigma as i64, 1)),
                (FunctionKind::PiMin, verts.iter().map(|v| dist(v, true)).min().unwrap()),
                (FunctionKind::PiMax, verts.iter().map(|v| dist(v, true)).max().unwrap()),
            ];
            if inst.unique_lp_optima() {
                if verts.len() != 1 {
                    bad("LP vertex not unique");
                }
                expected.push((FunctionKind::Pi, dist(&verts[0], true)));
                expected.push((FunctionKind::PiInf, dist(&verts[0], false)));
            }
            for (kind, want) in expected {
                if ev.value(kind).unwrap().value != Some(want) {
                    bad(kind.name());
                }
            }
        }
    }
    line(
        6,
        mismatches.is_empty(),
        format!(
            "10 instances, {points} right-hand sides, {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let mut totals = WorstTotals::default();
    let results = [
        criterion_1(&mut totals),
        criterion_2(&mut totals),
        criterion_3(&mut totals),
        criterion_4(&totals),
        criterion_5(),
        criterion_6(),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
