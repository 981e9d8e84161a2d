mod common;

use batchlp::bounds::{project_box, Bounds, Interval};
use batchlp::fsb::{product_score, DEFAULT_SCORE_EPS};
use batchlp::io::{parse_mps, write_mps, MpsModel};
use batchlp::model::BatchProblem;
use batchlp::oracle::{oracle_solve, OracleStatus};
use batchlp::pdhg::{solve, BatchSolver, SingleSolver, SolverConfig};
use common::{kind_for, tiny_lp, Kind};
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = Interval> {
    (prop::option::of(-5.0..5.0f64), prop::option::of(0.0..5.0f64)).prop_map(|(lo, w)| {
        let lower = lo.unwrap_or(f64::NEG_INFINITY);
        let upper = match (lo, w) {
            (Some(l), Some(w)) => l + w,
            (None, Some(w)) => w,
            (_, None) => f64::INFINITY,
        };
        Interval::new(lower, upper)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_lands_in_box(v in prop::collection::vec(-1e3..1e3f64, 1..8), ivs in prop::collection::vec(interval(), 8)) {
        let b = Bounds::from_intervals(&ivs[..v.len()]);
        let p = project_box(&v, &b);
        for (i, x) in p.iter().enumerate() {
            let iv = b.get(i);
            prop_assert!(iv.lower <= *x && *x <= iv.upper);
            if iv.lower <= v[i] && v[i] <= iv.upper {
                prop_assert_eq!(*x, v[i]);
            }
        }
    }

    #[test]
    fn operator_output_stays_in_bounds(seed in 0u64..10_000, steps in 1usize..40) {
        let p = tiny_lp(seed, kind_for(seed), 12);
        let mut s = SingleSolver::new(&p, &SolverConfig::default(), None).unwrap();
        for _ in 0..steps {
            if s.iterate().unwrap().is_some() {
                break;
            }
            // the reflected iterate may leave the box; T's primal output may not
            for (i, x) in s.last_t().x.iter().enumerate() {
                let iv = p.var_bounds.get(i);
                prop_assert!(iv.lower <= *x && *x <= iv.upper);
            }
        }
    }

    #[test]
    fn solves_are_deterministic(seed in 0u64..10_000) {
        let p = tiny_lp(seed, kind_for(seed), 12);
        let cfg = SolverConfig::default();
        prop_assert_eq!(solve(&p, &cfg, None).unwrap(), solve(&p, &cfg, None).unwrap());
    }

    #[test]
    fn duplicate_columns_identical(seed in 0u64..10_000, width in 2usize..5) {
        let p = tiny_lp(seed, Kind::Feasible, 10);
        let batch = BatchProblem::replicate(p, width).unwrap();
        let mut bs = BatchSolver::new(&batch, &SolverConfig::default()).unwrap();
        for _ in 0..50 {
            if bs.iterate().unwrap().is_some() {
                break;
            }
            for j in 1..bs.active_width() {
                prop_assert_eq!(bs.primal_block().col(0), bs.primal_block().col(j));
                prop_assert_eq!(bs.dual_block().col(0), bs.dual_block().col(j));
            }
        }
    }

    #[test]
    fn mps_round_trip(seed in 0u64..10_000) {
        let p = tiny_lp(seed, kind_for(seed), 14);
        let integer: Vec<usize> = (0..p.n_cols()).filter(|j| j % 2 == 0).collect();
        let back = parse_mps(&write_mps(&MpsModel::from_problem("rt", p.clone(), integer.clone()))).unwrap();
        prop_assert_eq!(&back.problem, &p);
        prop_assert_eq!(back.integer, integer);
    }

    #[test]
    fn oracle_optimum_is_below_every_vertex_objective(seed in 0u64..2_000) {
        let p = tiny_lp(seed, Kind::Feasible, 10);
        let o = oracle_solve(&p).unwrap();
        prop_assert_eq!(o.status, OracleStatus::Optimal);
        let x = o.vertex.unwrap();
        prop_assert!((p.objective(&x) - o.objective).abs() <= 1e-9 * (1.0 + o.objective.abs()));
        for (i, v) in x.iter().enumerate() {
            let iv = p.var_bounds.get(i);
            prop_assert!(iv.lower - 1e-9 <= *v && *v <= iv.upper + 1e-9);
        }
    }

    #[test]
    fn product_score_is_floored_and_symmetric(d in 0.0..10.0f64, u in 0.0..10.0f64) {
        let s = product_score(d, u, DEFAULT_SCORE_EPS);
        prop_assert!(s.is_finite() && s >= DEFAULT_SCORE_EPS * DEFAULT_SCORE_EPS);
        prop_assert_eq!(s, product_score(u, d, DEFAULT_SCORE_EPS));
    }
}
