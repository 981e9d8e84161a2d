mod common;

use batchlp::bounds::{Bounds, Interval};
use batchlp::fsb::{build_fsb_batch, run_fsb, score_branching, FsbConfig, FsbOutcome, FsbRequest, DEFAULT_SCORE_EPS};
use batchlp::model::LpProblem;
use batchlp::obbt::{build_obbt_batch, domain_reduction_stats, run_obbt, ObbtConfig};
use batchlp::oracle::{oracle_solve, OracleStatus};
use batchlp::pdhg::{SolverConfig, Status};
use batchlp::sparse::SparseMatrix;
use common::{tiny_lp, Kind, INF};

/// max x₀ + x₁ + 1.2x₂ subject to 2x₀ + 2x₁ + 2x₂ ≤ 3 and x ∈ [0, 1]³, with x₂ also
/// capped by x₀ + x₂ ≤ 1.5.
fn knapsack() -> LpProblem {
    LpProblem::new(
        SparseMatrix::from_dense(&[vec![2.0, 2.0, 2.0], vec![1.0, 0.0, 1.0]], 3).unwrap(),
        vec![-1.0, -1.0, -1.2],
        Bounds::from_intervals(&[Interval::new(-INF, 3.0), Interval::new(-INF, 1.5)]),
        Bounds::uniform(3, Interval::new(0.0, 1.0)),
    )
    .unwrap()
}

fn root_request(p: &LpProblem) -> FsbRequest {
    let x = oracle_solve(p).unwrap().vertex.unwrap();
    FsbRequest::from_candidates(p.clone(), x, &(0..p.n_cols()).collect::<Vec<_>>(), 1e-6).unwrap()
}

#[test]
fn fsb_children_match_oracle() {
    let p = knapsack();
    let req = root_request(&p);
    assert!(req.p() > 0);
    let cfg = FsbConfig { solver: SolverConfig::with_eps(1e-6), ..FsbConfig::default() };
    let out = run_fsb(&req, &cfg).unwrap();
    let batch = build_fsb_batch(&req).unwrap();
    for (j, b) in out.branches.iter().enumerate() {
        for (col, child) in [(j, &b.up), (req.p() + j, &b.down)] {
            let o = oracle_solve(&batch.resolve_column(col).unwrap().to_problem(&batch.base().a)).unwrap();
            match o.status {
                OracleStatus::Optimal => assert!((o.objective - child.objective).abs() <= 1e-4 * (1.0 + o.objective.abs())),
                OracleStatus::Infeasible => assert!(child.infeasible),
                OracleStatus::Unbounded => panic!("bounded by construction"),
            }
        }
    }
}

#[test]
fn fsb_is_deterministic() {
    let req = root_request(&knapsack());
    let cfg = FsbConfig::default();
    assert_eq!(run_fsb(&req, &cfg).unwrap(), run_fsb(&req, &cfg).unwrap());
}

#[test]
fn ranking_ignores_branch_order() {
    let req = root_request(&knapsack());
    let out = run_fsb(&req, &FsbConfig::default()).unwrap();
    let mut reversed: FsbOutcome = out.clone();
    reversed.branches.reverse();
    assert_eq!(score_branching(&out, DEFAULT_SCORE_EPS), score_branching(&reversed, DEFAULT_SCORE_EPS));
}

#[test]
fn fsb_with_an_infeasible_up_branch() {
    // x₀ = 1 leaves x₁ ≤ 0.25 from the first row, but the second row needs x₁ ≥ 0.3
    let p = LpProblem::new(
        SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]], 2).unwrap(),
        vec![-1.0, 0.0],
        Bounds::from_intervals(&[Interval::new(-INF, 1.5), Interval::new(0.3, INF)]),
        Bounds::uniform(2, Interval::new(0.0, 1.0)),
    )
    .unwrap();
    let req = FsbRequest::new(p.clone(), vec![0.5, 0.5], vec![0]).unwrap();
    let out = run_fsb(&req, &FsbConfig { solver: SolverConfig::with_eps(1e-6), ..FsbConfig::default() }).unwrap();
    let batch = build_fsb_batch(&req).unwrap();
    let up = oracle_solve(&batch.resolve_column(0).unwrap().to_problem(&p.a)).unwrap();
    assert_eq!(up.status, OracleStatus::Infeasible);
    assert!(out.branches[0].up.infeasible);
    assert_eq!(out.branches[0].down.status, Status::Optimal);
}

#[test]
fn obbt_keeps_an_optimum_under_cutoff() {
    let mut checked = 0;
    for i in 0..60u64 {
        let p = tiny_lp(41_000 + i, Kind::Feasible, 10);
        let o = oracle_solve(&p).unwrap();
        let cfg = ObbtConfig { cutoff: Some(o.objective), ..ObbtConfig::default() };
        let out = run_obbt(&p, &cfg).unwrap();
        let tightened = out.apply(&p);
        // the optimal face survives: the tightened problem keeps the same optimum
        let again = oracle_solve(&tightened).unwrap();
        assert_eq!(again.status, OracleStatus::Optimal, "case {i}");
        assert!((again.objective - o.objective).abs() <= 1e-6 * (1.0 + o.objective.abs()), "case {i}");
        checked += 1;
    }
    assert_eq!(checked, 60);
}

#[test]
fn obbt_batch_layout() {
    let p = knapsack();
    let batch = build_obbt_batch(&p, &ObbtConfig { cutoff: Some(-1.0), ..ObbtConfig::default() }).unwrap();
    assert_eq!(batch.width(), 6);
    assert_eq!(batch.base().n_rows(), p.n_rows() + 1);
    for i in 0..3 {
        let lo = batch.resolve_column(i).unwrap().objective_vector();
        let hi = batch.resolve_column(3 + i).unwrap().objective_vector();
        for j in 0..3 {
            assert_eq!(lo[j], if i == j { 1.0 } else { 0.0 });
            assert_eq!(hi[j], -lo[j]);
        }
    }
}

#[test]
fn obbt_lenient_never_loosens() {
    for i in 0..30u64 {
        let p = tiny_lp(43_000 + i, Kind::Feasible, 10);
        let cfg = ObbtConfig { lenient: true, max_iterations: 200, ..ObbtConfig::default() };
        let out = run_obbt(&p, &cfg).unwrap();
        let x = oracle_solve(&p).unwrap().vertex.unwrap();
        for v in &out.variables {
            assert!(v.new.lower >= v.old.lower && v.new.upper <= v.old.upper);
            assert!(v.new.lower <= x[v.variable] && x[v.variable] <= v.new.upper, "case {i} variable {}", v.variable);
        }
        let (changed, pct) = domain_reduction_stats(&out, &p.var_bounds);
        assert_eq!(changed, out.changed);
        assert!((0.0..=100.0).contains(&pct));
    }
}
