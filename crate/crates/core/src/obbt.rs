//! Optimization-based bound tightening.
//!
//! Every variable is minimized and maximized over the LP relaxation in one
//! batch of `2n` columns. Bounds move only by certified amounts: the solved
//! value is widened by the margin `Δ = ε(1 + |obj| + |φ|)` and an update is
//! applied only when it beats the current bound by `min_improvement`.

use serde::{Deserialize, Serialize};

use crate::bounds::{Bounds, Interval};
use crate::error::{Error, Result};
use crate::model::{BatchProblem, LpProblem, ObjectiveMode, PresetOutcome};
use crate::pdhg::{solve_batch, SolveResult, SolverConfig, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObbtConfig {
    pub eps_opt: f64,
    /// Dual residual tolerance; a bound is only trusted at this accuracy.
    pub eps_dual: f64,
    pub min_improvement: f64,
    pub max_iterations: usize,
    /// Objective cutoff `cᵀx ≤ α`.
    pub cutoff: Option<f64>,
    /// Also accept the dual objective of columns stopped by the iteration
    /// limit whose dual residual is within `eps_dual`.
    pub lenient: bool,
}

impl Default for ObbtConfig {
    fn default() -> Self {
        ObbtConfig {
            eps_opt: 1e-4,
            eps_dual: 1e-8,
            min_improvement: 1e-4,
            max_iterations: 100_000,
            cutoff: None,
            lenient: false,
        }
    }
}

impl ObbtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_dual > 0.0 && self.eps_dual <= self.eps_opt) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < eps_dual ≤ eps_opt, got eps_dual = {}, eps_opt = {}",
                self.eps_dual, self.eps_opt
            )));
        }
        if !(self.min_improvement > 0.0) {
            return Err(Error::InvalidConfig(format!("min_improvement must be positive, got {}", self.min_improvement)));
        }
        if let Some(a) = self.cutoff {
            if a.is_nan() {
                return Err(Error::InvalidConfig("cutoff is NaN".into()));
            }
        }
        self.solver_config().validate()
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            eps_opt: self.eps_opt,
            eps_dual: Some(self.eps_dual),
            max_iterations: self.max_iterations,
            ..SolverConfig::default()
        }
    }
}

/// Column `i` minimizes `x_i`, column `n + i` minimizes `−x_i`. Both columns
/// of a fixed variable are decided up front.
pub fn build_obbt_batch(problem: &LpProblem, config: &ObbtConfig) -> Result<BatchProblem> {
    let n = problem.n_cols();
    let mut batch = BatchProblem::new(problem.clone(), 2 * n, ObjectiveMode::SignedUnit, Vec::new(), config.cutoff)?;
    let vb = &problem.var_bounds;
    for i in 0..n {
        if vb.lower[i] == vb.upper[i] {
            let v = vb.lower[i];
            batch.set_preset(i, PresetOutcome { status: Status::Optimal, objective: v })?;
            batch.set_preset(n + i, PresetOutcome { status: Status::Optimal, objective: -v })?;
        }
    }
    Ok(batch)
}

/// A certified bound value, before comparison with the current bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeBound {
    /// Solved extreme value of the variable.
    pub value: f64,
    pub margin: f64,
    /// `value ∓ margin`.
    pub bound: f64,
    /// Taken from the dual objective of an unfinished column.
    pub from_dual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableTightening {
    pub variable: usize,
    pub old: Interval,
    pub new: Interval,
    pub lower_changed: bool,
    pub upper_changed: bool,
    pub lower_status: Status,
    pub upper_status: Status,
    pub lower_candidate: Option<SafeBound>,
    pub upper_candidate: Option<SafeBound>,
}

impl VariableTightening {
    pub fn changed(&self) -> bool {
        self.lower_changed || self.upper_changed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObbtOutcome {
    pub variables: Vec<VariableTightening>,
    /// Columns solved to optimality, presets excluded.
    pub solved: usize,
    /// Columns actually handed to the solver.
    pub subproblems: usize,
    pub iteration_limit: usize,
    pub batch_iterations: usize,
    pub changed: usize,
    /// Mean percentage domain reduction over changed variables with finite width.
    pub mean_reduction: f64,
}

impl ObbtOutcome {
    pub fn tightened_bounds(&self) -> Bounds {
        let iv: Vec<Interval> = self.variables.iter().map(|v| v.new).collect();
        Bounds::from_intervals(&iv)
    }

    /// The problem with its variable bounds replaced by the tightened ones.
    pub fn apply(&self, problem: &LpProblem) -> LpProblem {
        LpProblem {
            var_bounds: self.tightened_bounds(),
            ..problem.clone()
        }
    }

    pub fn max_margin(&self) -> f64 {
        self.variables
            .iter()
            .flat_map(|v| [v.lower_candidate, v.upper_candidate])
            .flatten()
            .map(|c| c.margin)
            .fold(0.0, f64::max)
    }
}

fn margin(eps: f64, objective: f64, dual_objective: f64) -> f64 {
    eps * (1.0 + objective.abs() + dual_objective.abs())
}

/// Safe lower bound on the column objective, if the column certifies one.
fn certified_minimum(r: &SolveResult, preset: bool, config: &ObbtConfig) -> Option<SafeBound> {
    if preset {
        return (r.status == Status::Optimal).then_some(SafeBound {
            value: r.objective,
            margin: 0.0,
            bound: r.objective,
            from_dual: false,
        });
    }
    let (value, from_dual) = match r.status {
        Status::Optimal => (r.objective, false),
        Status::IterationLimit if config.lenient && r.metrics.dual_feasible() => (r.dual_objective, true),
        _ => return None,
    };
    let d = margin(config.eps_opt, r.objective, r.dual_objective);
    (value.is_finite() && d.is_finite()).then_some(SafeBound {
        value,
        margin: d,
        bound: value - d,
        from_dual,
    })
}

/// Runs one OBBT pass over `problem`.
pub fn run_obbt(problem: &LpProblem, config: &ObbtConfig) -> Result<ObbtOutcome> {
    config.validate()?;
    let batch = build_obbt_batch(problem, config)?;
    let res = solve_batch(&batch, &config.solver_config())?;
    let n = problem.n_cols();
    let vb = &problem.var_bounds;
    let mut variables = Vec::with_capacity(n);
    for i in 0..n {
        let old = vb.get(i);
        let (lo_res, hi_res) = (&res.results[i], &res.results[n + i]);
        let fixed = batch.preset(i).is_some();
        let lower_candidate = certified_minimum(lo_res, fixed, config);
        // column n + i minimizes −x_i: negate its certified minimum
        let upper_candidate = certified_minimum(hi_res, fixed, config).map(|s| SafeBound {
            value: -s.value,
            margin: s.margin,
            bound: -s.bound,
            from_dual: s.from_dual,
        });
        let mut new = old;
        let mut lower_changed = false;
        let mut upper_changed = false;
        if let Some(s) = lower_candidate {
            if s.bound - old.lower > config.min_improvement {
                new.lower = s.bound;
                lower_changed = true;
            }
        }
        if let Some(s) = upper_candidate {
            if old.upper - s.bound > config.min_improvement {
                new.upper = s.bound;
                upper_changed = true;
            }
        }
        if new.lower > new.upper {
            new = old;
            lower_changed = false;
            upper_changed = false;
        }
        variables.push(VariableTightening {
            variable: i,
            old,
            new,
            lower_changed,
            upper_changed,
            lower_status: lo_res.status,
            upper_status: hi_res.status,
            lower_candidate,
            upper_candidate,
        });
    }
    let solved_cols = (0..2 * n).filter(|&j| batch.preset(j).is_none());
    let subproblems = solved_cols.clone().count();
    let solved = solved_cols.clone().filter(|&j| res.results[j].status == Status::Optimal).count();
    let iteration_limit = solved_cols.filter(|&j| res.results[j].status == Status::IterationLimit).count();
    let mut outcome = ObbtOutcome {
        variables,
        solved,
        subproblems,
        iteration_limit,
        batch_iterations: res.iterations,
        changed: 0,
        mean_reduction: 0.0,
    };
    let (changed, mean) = domain_reduction_stats(&outcome, vb);
    outcome.changed = changed;
    outcome.mean_reduction = mean;
    Ok(outcome)
}

/// Number of changed variables and their mean percentage width reduction.
/// Variables with infinite original width count as changed but are left
/// out of the mean.
pub fn domain_reduction_stats(outcome: &ObbtOutcome, original: &Bounds) -> (usize, f64) {
    let mut changed = 0;
    let mut sum = 0.0;
    let mut finite = 0;
    for v in outcome.variables.iter().filter(|v| v.changed()) {
        changed += 1;
        let old = original.get(v.variable).width();
        if old.is_finite() && old > 0.0 {
            sum += 100.0 * (old - v.new.width()) / old;
            finite += 1;
        }
    }
    (changed, if finite == 0 { 0.0 } else { sum / finite as f64 })
}
