//! Full strong branching: both children of every fractional variable are
//! solved as one batch of `2p` LPs sharing the relaxation's matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BatchProblem, ColumnOverride, LpProblem, ObjectiveMode, OverrideKind, PresetOutcome};
use crate::pdhg::{solve_batch_in, BatchWorkspace, SolverConfig, Status};

pub const DEFAULT_INTEGRALITY_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_INFEASIBLE_DELTA: f64 = 1e20;
pub const DEFAULT_SCORE_EPS: f64 = 1e-6;

/// A relaxation optimum together with the variables to branch on.
#[derive(Debug, Clone, PartialEq)]
pub struct FsbRequest {
    pub problem: LpProblem,
    pub x_rel: Vec<f64>,
    pub fractional: Vec<usize>,
    pub tolerance: f64,
}

/// `|v − round(v)| > tol`.
pub fn is_fractional(v: f64, tol: f64) -> bool {
    (v - v.round()).abs() > tol
}

/// Candidates whose relaxation value is fractional, in ascending order.
pub fn fractional_indices(x_rel: &[f64], candidates: &[usize], tol: f64) -> Vec<usize> {
    let mut out: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| i < x_rel.len() && is_fractional(x_rel[i], tol))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

impl FsbRequest {
    pub fn new(problem: LpProblem, x_rel: Vec<f64>, fractional: Vec<usize>) -> Result<Self> {
        Self::with_tolerance(problem, x_rel, fractional, DEFAULT_INTEGRALITY_TOLERANCE)
    }

    pub fn with_tolerance(problem: LpProblem, x_rel: Vec<f64>, fractional: Vec<usize>, tolerance: f64) -> Result<Self> {
        let req = FsbRequest {
            problem,
            x_rel,
            fractional,
            tolerance,
        };
        req.validate()?;
        Ok(req)
    }

    /// Branches on every fractional entry among the integrality `candidates`.
    pub fn from_candidates(problem: LpProblem, x_rel: Vec<f64>, candidates: &[usize], tolerance: f64) -> Result<Self> {
        let fractional = fractional_indices(&x_rel, candidates, tolerance);
        Self::with_tolerance(problem, x_rel, fractional, tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.problem.n_cols();
        if self.x_rel.len() != n {
            return Err(Error::DimensionMismatch(format!("x_rel has {} entries, problem has {n} variables", self.x_rel.len())));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidRequest(format!("integrality tolerance must be nonnegative, got {}", self.tolerance)));
        }
        let vb = &self.problem.var_bounds;
        for (i, &v) in self.x_rel.iter().enumerate() {
            if !v.is_finite() || v < vb.lower[i] - self.tolerance || v > vb.upper[i] + self.tolerance {
                return Err(Error::InvalidRequest(format!(
                    "x_rel[{i}] = {v} lies outside [{}, {}]",
                    vb.lower[i], vb.upper[i]
                )));
            }
        }
        let mut seen = vec![false; n];
        for &i in &self.fractional {
            if i >= n {
                return Err(Error::InvalidRequest(format!("fractional index {i} out of range for {n} variables")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidRequest(format!("fractional index {i} listed twice")));
            }
            if vb.lower[i] == vb.upper[i] {
                return Err(Error::InvalidRequest(format!("variable {i} is fixed and cannot be fractional")));
            }
            if !is_fractional(self.x_rel[i], self.tolerance) {
                return Err(Error::InvalidRequest(format!("x_rel[{i}] = {} is integral within tolerance", self.x_rel[i])));
            }
        }
        Ok(())
    }

    /// Number of fractional variables `p`; the batch has `2p` columns.
    pub fn p(&self) -> usize {
        self.fractional.len()
    }

    pub fn root_objective(&self) -> f64 {
        self.problem.objective(&self.x_rel)
    }
}

/// Column `j < p` raises the lower bound of the j-th fractional variable to
/// its ceiling; column `p + j` lowers its upper bound to its floor. A child
/// whose new bound crosses the opposite original bound is preset infeasible;
/// its override is clamped to that bound so the column stays well formed.
pub fn build_fsb_batch(req: &FsbRequest) -> Result<BatchProblem> {
    req.validate()?;
    let p = req.p();
    let vb = &req.problem.var_bounds;
    let mut overrides = Vec::with_capacity(2 * p);
    let mut infeasible = Vec::new();
    for (j, &i) in req.fractional.iter().enumerate() {
        let up = req.x_rel[i].ceil();
        let down = req.x_rel[i].floor();
        if up > vb.upper[i] {
            infeasible.push(j);
        }
        if down < vb.lower[i] {
            infeasible.push(p + j);
        }
        overrides.push(ColumnOverride {
            column: j,
            kind: OverrideKind::VariableLower,
            variable: i,
            value: up.min(vb.upper[i]),
        });
        overrides.push(ColumnOverride {
            column: p + j,
            kind: OverrideKind::VariableUpper,
            variable: i,
            value: down.max(vb.lower[i]),
        });
    }
    let mut batch = BatchProblem::new(req.problem.clone(), 2 * p, ObjectiveMode::Shared, overrides, None)?;
    for j in infeasible {
        batch.set_preset(
            j,
            PresetOutcome {
                status: Status::PrimalInfeasible,
                objective: f64::INFINITY,
            },
        )?;
    }
    Ok(batch)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsbConfig {
    pub solver: SolverConfig,
    /// Objective change recorded for an infeasible child.
    pub infeasible_delta: f64,
}

impl Default for FsbConfig {
    fn default() -> Self {
        FsbConfig {
            solver: SolverConfig::default(),
            infeasible_delta: DEFAULT_INFEASIBLE_DELTA,
        }
    }
}

/// One child LP of a branching candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildOutcome {
    pub status: Status,
    pub objective: f64,
    /// `objective − cᵀx_rel`, or the configured large value when infeasible.
    pub delta: f64,
    pub infeasible: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchOutcome {
    pub variable: usize,
    pub value: f64,
    pub up: ChildOutcome,
    pub down: ChildOutcome,
    /// Product score with the default floor.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsbOutcome {
    pub root_objective: f64,
    pub branches: Vec<BranchOutcome>,
    pub batch_iterations: usize,
    pub spmm_count: usize,
}

impl FsbOutcome {
    pub fn iteration_limit_count(&self) -> usize {
        self.branches
            .iter()
            .flat_map(|b| [&b.up, &b.down])
            .filter(|c| c.status == Status::IterationLimit)
            .count()
    }
}

/// `max(Δ⁻, eps) · max(Δ⁺, eps)`.
pub fn product_score(down: f64, up: f64, eps: f64) -> f64 {
    down.max(eps) * up.max(eps)
}

/// Runs full strong branching on `req`.
pub fn run_fsb(req: &FsbRequest, config: &FsbConfig) -> Result<FsbOutcome> {
    run_fsb_in(req, config, &mut BatchWorkspace::new())
}

/// As [`run_fsb`], reusing `workspace` across rounds; its allocation keeps
/// the largest round's size.
pub fn run_fsb_in(req: &FsbRequest, config: &FsbConfig, workspace: &mut BatchWorkspace) -> Result<FsbOutcome> {
    let batch = build_fsb_batch(req)?;
    let root = req.root_objective();
    let res = solve_batch_in(&batch, &config.solver, workspace)?;
    let p = req.p();
    let child = |j: usize| {
        let r = &res.results[j];
        let infeasible = r.status == Status::PrimalInfeasible;
        ChildOutcome {
            status: r.status,
            objective: r.objective,
            delta: if infeasible { config.infeasible_delta } else { r.objective - root },
            infeasible,
            iterations: r.iterations,
        }
    };
    let branches = req
        .fractional
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let (up, down) = (child(j), child(p + j));
            BranchOutcome {
                variable: i,
                value: req.x_rel[i],
                score: product_score(down.delta, up.delta, DEFAULT_SCORE_EPS),
                up,
                down,
            }
        })
        .collect();
    Ok(FsbOutcome {
        root_objective: root,
        branches,
        batch_iterations: res.iterations,
        spmm_count: res.spmm_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedVariable {
    pub variable: usize,
    pub score: f64,
    pub down_delta: f64,
    pub up_delta: f64,
}

/// Variables by descending product score; ties go to the smaller index.
pub fn score_branching(outcome: &FsbOutcome, score_eps: f64) -> Vec<RankedVariable> {
    let mut ranked: Vec<RankedVariable> = outcome
        .branches
        .iter()
        .map(|b| RankedVariable {
            variable: b.variable,
            score: product_score(b.down.delta, b.up.delta, score_eps),
            down_delta: b.down.delta,
            up_delta: b.up.delta,
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.variable.cmp(&b.variable)));
    ranked
}
