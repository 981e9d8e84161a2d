//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that the lines come out in order and
//! the timing-sensitive throughput check has the machine to itself.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use batchlp::bounds::Interval;
use batchlp::fsb::{build_fsb_batch, fractional_indices, run_fsb, FsbConfig, FsbRequest};
use batchlp::io::{generate, parse_mps, write_mps, InstanceSpec, MpsModel};
use batchlp::model::OverrideKind;
use batchlp::obbt::{run_obbt, ObbtConfig};
use batchlp::oracle::{oracle_solve, OracleStatus};
use batchlp::pdhg::single::solve_traced;
use batchlp::pdhg::{m_norm, solve, solve_batch, RestartKind, SolverConfig, Status, StepParams};
use batchlp::model::BatchProblem;
use batchlp::sparse::{spectral_norm, Op, SparseMatrix};
use batchlp::tuner::tune;
use common::{kind_for, rel_gap, rng, tiny_lp, Kind};
use rand::Rng;

// criterion 1
const C1_CASES: u64 = 500;
const C1_MAX_SIZE: usize = 12;
const C1_EPS: f64 = 1e-6;
const C1_MAX_ITER: usize = 100_000;
const C1_OBJ_RTOL: f64 = 1e-4;
const C1_TIME_LIMIT: Duration = Duration::from_secs(60);
// criterion 2
const C2_CASES: u64 = 50;
// criterion 3
const C3_PER_FAMILY: usize = 5;
const C3_MAX_FRACTIONAL: usize = 10;
const C3_EPS: f64 = 1e-6;
const C3_OBJ_RTOL: f64 = 1e-4;
const C3_TIME_LIMIT: Duration = Duration::from_secs(300);
// criterion 4
const C4_SUBPROBLEMS: usize = 154;
// criterion 5
const C5_CASES: u64 = 200;
const C5_MIN_IMPROVEMENT: f64 = 1e-4;
// criterion 6
const C6_CASES: u64 = 100;
const C6_MAX_SIZE: usize = 24;
const C6_EPS_INFEAS: f64 = 1e-8;
// criterion 8
const C8_CASES: u64 = 100;
const C8_TOL: f64 = 1e-10;
// criterion 9
const C9_RATIO: f64 = 0.9;
// criterion 10
const C10_COEF_TOL: f64 = 1e-12;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn oracle_matches(o: OracleStatus, s: Status) -> bool {
    matches!(
        (o, s),
        (OracleStatus::Optimal, Status::Optimal)
            | (OracleStatus::Infeasible, Status::PrimalInfeasible)
            | (OracleStatus::Unbounded, Status::DualInfeasible)
    )
}

fn criterion_1() -> Check {
    let cfg = SolverConfig {
        eps_opt: C1_EPS,
        max_iterations: C1_MAX_ITER,
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let mut counts = [0usize; 3];
    let mut max_iter = 0;
    let mut worst_gap: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..C1_CASES {
        let p = tiny_lp(1000 + i, kind_for(i), C1_MAX_SIZE);
        assert!(p.n_rows() + p.n_cols() <= C1_MAX_SIZE);
        let o = oracle_solve(&p).map_err(|e| e.to_string())?;
        let r = solve(&p, &cfg, None).map_err(|e| e.to_string())?;
        counts[o.status as usize] += 1;
        max_iter = max_iter.max(r.iterations);
        let ok = oracle_matches(o.status, r.status)
            && (o.status != OracleStatus::Optimal || {
                let g = rel_gap(o.objective, r.objective);
                worst_gap = worst_gap.max(g);
                g <= C1_OBJ_RTOL
            });
        if !ok {
            failures.push(format!("case {i}: oracle {:?} {} vs {:?} {}", o.status, o.objective, r.status, r.objective));
        }
    }
    let elapsed = start.elapsed();
    ensure(failures.is_empty(), format!("{} mismatches, first: {}", failures.len(), failures.first().cloned().unwrap_or_default()))?;
    ensure(elapsed < C1_TIME_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{C1_CASES} cases (optimal {}, infeasible {}, unbounded {}), max {max_iter} iterations, worst gap {worst_gap:.1e}, {:.1}s",
        counts[0],
        counts[1],
        counts[2],
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Check {
    let cfg = SolverConfig {
        eps_opt: 1e-6,
        trace: true,
        ..SolverConfig::default()
    };
    let mut steps = 0;
    for i in 0..C2_CASES {
        let p = tiny_lp(7000 + i, kind_for(i), 14);
        let (single, strace) = solve_traced(&p, &cfg, None).map_err(|e| e.to_string())?;
        let batch = BatchProblem::replicate(p, 1).map_err(|e| e.to_string())?;
        let res = solve_batch(&batch, &cfg).map_err(|e| e.to_string())?;
        let btrace = res.trace.ok_or("batch trace missing")?;
        ensure(strace.residuals.len() == btrace.residuals.len(), format!("case {i}: trace lengths differ"))?;
        let same_residuals = strace.residuals.iter().zip(&btrace.residuals).all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(same_residuals, format!("case {i}: residual sequences differ"))?;
        ensure(strace.checksums == btrace.checksums, format!("case {i}: iterate checksums differ"))?;
        ensure(strace.restarts == btrace.restarts, format!("case {i}: restart events differ"))?;
        ensure(format!("{single:?}") == format!("{:?}", res.results[0]), format!("case {i}: final results differ"))?;
        steps += strace.checksums.len();
    }
    Ok(format!("{C2_CASES} instances, {steps} iterates compared bit for bit"))
}

/// Small instances of each family whose root relaxation has a fractional
/// integer variable, with the relaxation point from the oracle.
fn fsb_cases() -> Vec<(String, FsbRequest)> {
    let specs = [
        InstanceSpec::SetCover { rows: 4, cols: 6, density: 0.4 },
        InstanceSpec::CombAuction { items: 4, bids: 7 },
        InstanceSpec::MaxIndSet { nodes: 5, affinity: 2 },
        InstanceSpec::FacilityLocation { customers: 1, facilities: 2, ratio: 2.0 },
    ];
    let mut out = Vec::new();
    for spec in specs {
        let mut found = 0;
        for seed in 0..1000u64 {
            let g = generate(spec, seed).unwrap();
            if g.problem.n_rows() + g.problem.n_cols() > 14 {
                continue;
            }
            let o = oracle_solve(&g.problem).unwrap();
            let Some(x) = o.vertex else { continue };
            let mut frac = fractional_indices(&x, &g.integer, 1e-6);
            frac.truncate(C3_MAX_FRACTIONAL);
            if frac.is_empty() {
                continue;
            }
            let req = FsbRequest::new(g.problem.clone(), x, frac).unwrap();
            out.push((format!("{}/{}#{seed}", spec.family(), g.name), req));
            found += 1;
            if found == C3_PER_FAMILY {
                break;
            }
        }
    }
    out
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let cases = fsb_cases();
    ensure(cases.len() == 4 * C3_PER_FAMILY, format!("only {} instances with fractional roots", cases.len()))?;
    let cfg = FsbConfig {
        solver: SolverConfig::with_eps(C3_EPS),
        ..FsbConfig::default()
    };
    let (mut branches, mut infeasible, mut worst) = (0, 0, 0.0f64);
    for (name, req) in &cases {
        let batch = build_fsb_batch(req).map_err(|e| e.to_string())?;
        let out = run_fsb(req, &cfg).map_err(|e| e.to_string())?;
        let p = req.p();
        for (j, b) in out.branches.iter().enumerate() {
            for (col, child) in [(j, &b.up), (p + j, &b.down)] {
                let lp = batch.resolve_column(col).map_err(|e| e.to_string())?.to_problem(&batch.base().a);
                let o = oracle_solve(&lp).map_err(|e| e.to_string())?;
                branches += 1;
                match o.status {
                    OracleStatus::Infeasible => {
                        infeasible += 1;
                        ensure(child.infeasible && child.status == Status::PrimalInfeasible, format!("{name} column {col}: infeasible branch reported {:?}", child.status))?;
                    }
                    OracleStatus::Optimal => {
                        ensure(child.status == Status::Optimal, format!("{name} column {col}: {:?} instead of optimal", child.status))?;
                        let g = rel_gap(o.objective, child.objective);
                        worst = worst.max(g);
                        ensure(g <= C3_OBJ_RTOL, format!("{name} column {col}: {} vs oracle {}", child.objective, o.objective))?;
                        let floor = out.root_objective - 10.0 * C3_EPS * (1.0 + child.objective.abs());
                        ensure(child.objective >= floor, format!("{name} column {col}: branch below root"))?;
                    }
                    OracleStatus::Unbounded => return Err(format!("{name} column {col}: unbounded branch")),
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < C3_TIME_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} instances, {branches} branch LPs ({infeasible} infeasible), worst gap {worst:.1e}, {:.1}s",
        cases.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_4() -> Check {
    let g = generate(InstanceSpec::CombAuction { items: 100, bids: 1500 }, 0).map_err(|e| e.to_string())?;
    let p = C4_SUBPROBLEMS / 2;
    // a relaxation point with p fractional integer columns spread over the instance
    let step = g.integer.len() / p;
    let chosen: Vec<usize> = (0..p).map(|k| g.integer[k * step]).collect();
    let mut x = vec![0.0; g.problem.n_cols()];
    for (k, &i) in chosen.iter().enumerate() {
        x[i] = 0.25 + 0.5 * (k % 2) as f64;
    }
    let req = FsbRequest::from_candidates(g.problem.clone(), x.clone(), &g.integer, 1e-6).map_err(|e| e.to_string())?;
    ensure(req.p() == p, format!("{} fractional variables", req.p()))?;
    let batch = build_fsb_batch(&req).map_err(|e| e.to_string())?;
    ensure(batch.width() == C4_SUBPROBLEMS, format!("batch width {}", batch.width()))?;
    for col in 0..batch.width() {
        let ov: Vec<_> = batch.overrides().iter().filter(|o| o.column == col).collect();
        ensure(ov.len() == 1, format!("column {col} has {} overrides", ov.len()))?;
        let o = ov[0];
        let (j, kind) = if col < p { (col, OverrideKind::VariableLower) } else { (col - p, OverrideKind::VariableUpper) };
        let i = req.fractional[j];
        let want = if col < p { x[i].ceil() } else { x[i].floor() };
        ensure(o.kind == kind && o.variable == i && o.value == want, format!("column {col}: {o:?}"))?;
    }
    Ok(format!(
        "{} ({}x{}, nnz {}): p = {p}, N = {}, one override per column",
        g.name,
        g.problem.n_rows(),
        g.problem.n_cols(),
        g.problem.a.nnz(),
        batch.width()
    ))
}

fn criterion_5() -> Check {
    let cfg = ObbtConfig::default();
    let (mut changed, mut worst_second) = (0, 0.0f64);
    for i in 0..C5_CASES {
        let p = tiny_lp(30_000 + i, Kind::Feasible, 12);
        let o = oracle_solve(&p).map_err(|e| e.to_string())?;
        let xs = o.vertex.ok_or(format!("case {i}: oracle found no optimum"))?;
        let first = run_obbt(&p, &cfg).map_err(|e| e.to_string())?;
        changed += first.changed;
        for v in &first.variables {
            let x = xs[v.variable];
            ensure(v.new.lower <= x && x <= v.new.upper, format!("case {i} variable {}: optimum {x} outside {:?}", v.variable, v.new))?;
            ensure(v.old.lower <= v.new.lower && v.new.upper <= v.old.upper, format!("case {i} variable {}: {:?} not inside {:?}", v.variable, v.new, v.old))?;
        }
        let tightened = first.apply(&p);
        let second = run_obbt(&tightened, &cfg).map_err(|e| e.to_string())?;
        for (a, b) in first.variables.iter().zip(&second.variables) {
            let margin = |s: Option<batchlp::obbt::SafeBound>| s.map_or(0.0, |s| s.margin);
            let d_lo = margin(a.lower_candidate).max(margin(b.lower_candidate));
            let d_hi = margin(a.upper_candidate).max(margin(b.upper_candidate));
            let (ml, mu) = ((b.new.lower - a.new.lower).abs(), (b.new.upper - a.new.upper).abs());
            worst_second = worst_second.max(ml.max(mu));
            ensure(ml <= 2.0 * d_lo + C5_MIN_IMPROVEMENT, format!("case {i} variable {}: lower moved {ml} on the second pass", a.variable))?;
            ensure(mu <= 2.0 * d_hi + C5_MIN_IMPROVEMENT, format!("case {i} variable {}: upper moved {mu} on the second pass", a.variable))?;
        }
    }
    Ok(format!("{C5_CASES} LPs, {changed} variables tightened, 0 violations, largest second-pass move {worst_second:.1e}"))
}

fn criterion_6() -> Check {
    let cfg = SolverConfig {
        eps_infeas: C6_EPS_INFEAS,
        ..SolverConfig::default()
    };
    let mut max_iter = 0;
    for (kind, want, seed) in [
        (Kind::PrimalInfeasible, Status::PrimalInfeasible, 50_000u64),
        (Kind::Unbounded, Status::DualInfeasible, 60_000),
        (Kind::Feasible, Status::Optimal, 70_000),
    ] {
        for i in 0..C6_CASES {
            let p = tiny_lp(seed + i, kind, C6_MAX_SIZE);
            let r = solve(&p, &cfg, None).map_err(|e| e.to_string())?;
            max_iter = max_iter.max(r.iterations);
            ensure(r.status == want, format!("{kind:?} case {i}: {:?}", r.status))?;
            ensure((r.certificate.is_some()) == (want != Status::Optimal), format!("{kind:?} case {i}: certificate mismatch"))?;
        }
    }
    Ok(format!("{C6_CASES} primal-infeasible, {C6_CASES} dual-infeasible, {C6_CASES} controls classified, max {max_iter} iterations"))
}

fn criterion_7() -> Check {
    let g = generate(InstanceSpec::SetCover { rows: 40, cols: 60, density: 0.1 }, 11).map_err(|e| e.to_string())?;
    let base = SolverConfig {
        eps_opt: 1e-6,
        trace: true,
        ..SolverConfig::default()
    };
    let settings = [
        ("sufficient", RestartKind::Sufficient, base.clone()),
        (
            "necessary",
            RestartKind::Necessary,
            SolverConfig {
                beta_sufficient: 1e-9,
                beta_necessary: 0.99,
                beta_artificial: 1e9,
                ..base.clone()
            },
        ),
        (
            "artificial",
            RestartKind::Artificial,
            SolverConfig {
                beta_sufficient: 1e-9,
                beta_necessary: 2e-9,
                beta_artificial: 0.1,
                ..base.clone()
            },
        ),
    ];
    let mut report = Vec::new();
    for (label, kind, cfg) in settings {
        let (r, trace) = solve_traced(&g.problem, &cfg, None).map_err(|e| e.to_string())?;
        let fired = trace.restarts.iter().filter(|e| e.kind == kind).count();
        ensure(fired > 0, format!("{label} restart never fired ({:?})", r.restart_counts))?;
        for e in trace.restarts.iter().filter(|e| e.kind == RestartKind::Sufficient) {
            ensure(
                e.new_anchor_residual <= cfg.beta_sufficient * e.old_anchor_residual,
                format!("sufficient restart at {} without decay", e.iteration),
            )?;
        }
        for e in trace.restarts.iter().filter(|e| e.kind == RestartKind::Artificial) {
            let k = e.iteration - trace.restarts.iter().filter(|p| p.iteration < e.iteration).map(|p| p.iteration).max().unwrap_or(0);
            ensure(k as f64 > cfg.beta_artificial * e.iteration as f64 * 0.999, format!("artificial restart at {} too early", e.iteration))?;
        }
        report.push(format!("{label} {fired}"));
    }
    Ok(format!("{} ({}x{}): {}", g.name, g.problem.n_rows(), g.problem.n_cols(), report.join(", ")))
}

fn criterion_8() -> Check {
    let mut r = rng(8_000);
    let mut worst = 0.0f64;
    for case in 0..C8_CASES {
        let m = r.gen_range(1..8);
        let n = r.gen_range(1..8);
        let trip: Vec<(usize, usize, f64)> = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|_| r.gen_bool(0.6))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(i, j)| (i, j, r.gen_range(-2.0..2.0)))
            .collect();
        let a = SparseMatrix::from_triplets(m, n, &trip).map_err(|e| e.to_string())?;
        let norm = if a.nnz() == 0 { 1.0 } else { spectral_norm(&a).map_err(|e| e.to_string())? };
        let eta = r.gen_range(0.1..0.999) / norm;
        let w = 10f64.powf(r.gen_range(-2.0..2.0));
        let params = StepParams::new(eta, w);
        let dx: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let dy: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut adx = vec![0.0; m];
        a.spmv(Op::Plain, &dx, &mut adx).map_err(|e| e.to_string())?;
        let got = m_norm(&dx, &dy, &adx, &params).map_err(|e| format!("case {case}: {e}"))?;
        // zᵀMz with M = [[(w/η)I, Aᵀ], [A, (1/(ηw))I]] assembled densely
        let dim = n + m;
        let mut mat = vec![vec![0.0; dim]; dim];
        for i in 0..n {
            mat[i][i] = w / eta;
        }
        for i in 0..m {
            mat[n + i][n + i] = 1.0 / (eta * w);
        }
        for &(i, j, v) in &a.triplets() {
            mat[n + i][j] = v;
            mat[j][n + i] = v;
        }
        let z: Vec<f64> = dx.iter().chain(&dy).copied().collect();
        let q: f64 = (0..dim).map(|i| z[i] * (0..dim).map(|j| mat[i][j] * z[j]).sum::<f64>()).sum();
        ensure(q >= 0.0, format!("case {case}: quadratic form {q} < 0 with η‖A‖ < 1"))?;
        let diff = (got - q.sqrt()).abs();
        worst = worst.max(diff);
        ensure(diff <= C8_TOL, format!("case {case}: {got} vs dense {}", q.sqrt()))?;
    }
    Ok(format!("{C8_CASES} tuples, largest deviation {worst:.1e}"))
}

fn criterion_9() -> Check {
    let g = generate(InstanceSpec::SetCover { rows: 1000, cols: 1000, density: 0.01 }, 9).map_err(|e| e.to_string())?;
    let report = tune(&g.problem.a, &[1, 32, 64, 128, 256, 512], 10).map_err(|e| e.to_string())?;
    ensure(report.is_consistent(), "report is internally inconsistent")?;
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("tune_set_cover.csv");
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(|e| e.to_string())?;
    std::fs::write(&path, &buf).map_err(|e| e.to_string())?;
    let one = report.timing(1).unwrap().per_column;
    let chosen = report.timing(report.chosen).unwrap().per_column;
    let ratio = chosen / one;
    let msg = format!("chosen width {}, per-column {:.2e}s vs width-1 {:.2e}s (ratio {ratio:.2}), report {}", report.chosen, chosen, one, path.display());
    if ratio <= C9_RATIO {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn criterion_10() -> Check {
    let ranges = parse_mps(&fixture("ranges.mps")).map_err(|e| e.to_string())?;
    let want = [(2.0, 5.0), (-1.0, 2.0), (7.0, 7.0), (1.5, 4.0), (4.0, 6.5), (-2.0, -1.5), (-1.5, -1.0)];
    for (i, &(lo, hi)) in want.iter().enumerate() {
        let got = ranges.problem.row_bounds.get(i);
        ensure(got == Interval::new(lo, hi), format!("RANGES row {}: {got:?}, expected [{lo}, {hi}]", ranges.row_names[i]))?;
    }
    let tiny = parse_mps(&fixture("tiny.mps")).map_err(|e| e.to_string())?;
    ensure(tiny.problem.row_bounds.get(0) == Interval::new(f64::NEG_INFINITY, 1.0), "L row bounds")?;

    let specs = [
        InstanceSpec::SetCover { rows: 50, cols: 80, density: 0.05 },
        InstanceSpec::CombAuction { items: 30, bids: 90 },
        InstanceSpec::MaxIndSet { nodes: 60, affinity: 3 },
        InstanceSpec::FacilityLocation { customers: 8, facilities: 5, ratio: 3.0 },
    ];
    let mut entries = 0;
    for spec in specs {
        let g = generate(spec, 5).map_err(|e| e.to_string())?;
        let model = MpsModel::from_problem(&g.name, g.problem.clone(), g.integer.clone());
        let back = parse_mps(&write_mps(&model)).map_err(|e| e.to_string())?;
        let (p, q) = (&g.problem, &back.problem);
        ensure((p.n_rows(), p.n_cols(), p.a.nnz()) == (q.n_rows(), q.n_cols(), q.a.nnz()), format!("{}: dimensions changed", g.name))?;
        for (x, y) in p.a.triplets().iter().zip(q.a.triplets()) {
            ensure(x.0 == y.0 && x.1 == y.1 && (x.2 - y.2).abs() <= C10_COEF_TOL * (1.0 + x.2.abs()), format!("{}: coefficient {x:?} became {y:?}", g.name))?;
        }
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= C10_COEF_TOL * (1.0 + a.abs());
        ensure(p.c.iter().zip(&q.c).all(|(a, b)| close(*a, *b)), format!("{}: objective changed", g.name))?;
        for (pb, qb) in [(&p.row_bounds, &q.row_bounds), (&p.var_bounds, &q.var_bounds)] {
            for (a, b) in pb.iter().zip(qb.iter()) {
                ensure(close(a.lower, b.lower) && close(a.upper, b.upper), format!("{}: bound {a:?} became {b:?}", g.name))?;
            }
        }
        ensure(back.integer == g.integer, format!("{}: integrality markers changed", g.name))?;
        entries += p.a.nnz();
    }
    Ok(format!("RANGES fixture exact, 4 generated instances ({entries} coefficients) round-tripped"))
}

type Criterion = (u32, &'static str, bool, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "oracle equivalence", true, criterion_1),
        (2, "batch of one is bit-identical", true, criterion_2),
        (3, "batched FSB matches oracle", true, criterion_3),
        (4, "FSB batch shape |S| = 154", true, criterion_4),
        (5, "OBBT safety", true, criterion_5),
        (6, "infeasibility certificates", true, criterion_6),
        (7, "restart mechanics", true, criterion_7),
        (8, "M-norm against dense quadratic form", true, criterion_8),
        (9, "SpMM throughput trend (soft)", false, criterion_9),
        (10, "MPS round trip and RANGES", true, criterion_10),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut hard_failures = 0;
    for (id, name, gated, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) if gated => {
                hard_failures += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
            Err(detail) => println!("criterion {id:>2} FAIL  {name} (reported, not gated): {detail}"),
        }
    }
    if hard_failures > 0 {
        eprintln!("{hard_failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
