//! Reflected-Halpern PDHG for a single LP.

use crate::bounds::clamp;
use crate::error::{Error, Result};
use crate::model::{validate, LpProblem};
use crate::sparse::Op;

use super::{
    dual_component, dual_displacement, evaluate_restart, halpern_coefficients, halpern_component, infeasibility,
    m_norm, optimality, primal_component, smooth_primal_weight, step_size, Certificate, ColumnView,
    OptimalityMetrics, ProbeInputs, RestartCounts, RestartDecision, RestartEvent, RestartHistory, RestartKind,
    SolveResult, SolverConfig, Status, StepParams, Trace,
};

/// Iterate `z = (x, y)`, anchor `z⁰` and the products the loop maintains.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_anchor: Vec<f64>,
    pub y_anchor: Vec<f64>,
    /// `A x`, updated alongside the Halpern step.
    pub ax: Vec<f64>,
    /// `A x⁰`.
    pub ax_anchor: Vec<f64>,
    pub params: StepParams,
    pub history: RestartHistory,
    /// Outer index `n`.
    pub restarts: usize,
    pub restart_counts: RestartCounts,
}

impl IterateState {
    /// State anchored at `(x, y)`.
    pub fn new(problem: &LpProblem, x: Vec<f64>, y: Vec<f64>, params: StepParams) -> Result<Self> {
        if x.len() != problem.n_cols() || y.len() != problem.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "initial point has sizes ({}, {}), problem is {}x{}",
                x.len(),
                y.len(),
                problem.n_rows(),
                problem.n_cols()
            )));
        }
        let mut ax = vec![0.0; problem.n_rows()];
        problem.a.spmv(Op::Plain, &x, &mut ax)?;
        Ok(IterateState {
            x_anchor: x.clone(),
            y_anchor: y.clone(),
            ax_anchor: ax.clone(),
            x,
            y,
            ax,
            params,
            history: RestartHistory::default(),
            restarts: 0,
            restart_counts: RestartCounts::default(),
        })
    }

    /// Cold start `(Π_[x̲,x̄](0), 0)`.
    pub fn cold(problem: &LpProblem, params: StepParams) -> Result<Self> {
        let x = problem
            .var_bounds
            .iter()
            .map(|b| clamp(0.0, b.lower, b.upper))
            .collect();
        Self::new(problem, x, vec![0.0; problem.n_rows()], params)
    }
}

/// `T(z)` together with the two products computed on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct TOutput {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `Aᵀ y` at the input point.
    pub aty: Vec<f64>,
    /// `2x̃ − x`.
    pub extrapolated: Vec<f64>,
    /// `A(2x̃ − x)`.
    pub a_ext: Vec<f64>,
}

impl TOutput {
    pub fn zeros(problem: &LpProblem) -> Self {
        let (m, n) = (problem.n_rows(), problem.n_cols());
        TOutput {
            x: vec![0.0; n],
            y: vec![0.0; m],
            aty: vec![0.0; n],
            extrapolated: vec![0.0; n],
            a_ext: vec![0.0; m],
        }
    }
}

/// Applies the PDHG operator at the current iterate. Performs exactly two
/// sparse products.
pub fn apply_t(state: &IterateState, problem: &LpProblem, out: &mut TOutput) -> Result<()> {
    let p = &state.params;
    problem.a.spmv(Op::Transpose, &state.y, &mut out.aty)?;
    let vb = &problem.var_bounds;
    for i in 0..state.x.len() {
        let xt = primal_component(state.x[i], out.aty[i], problem.c[i], p.tau, vb.lower[i], vb.upper[i]);
        out.x[i] = xt;
        out.extrapolated[i] = 2.0 * xt - state.x[i];
    }
    problem.a.spmv(Op::Plain, &out.extrapolated, &mut out.a_ext)?;
    let rb = &problem.row_bounds;
    for i in 0..state.y.len() {
        out.y[i] = dual_component(state.y[i], out.a_ext[i], p.sigma, rb.lower[i], rb.upper[i]);
    }
    Ok(())
}

/// `z ← (k+1)/(k+2)·(2T(z) − z) + 1/(k+2)·z⁰`; advances `k` and `K`.
pub fn halpern_step(state: &mut IterateState, t: &TOutput) {
    let (a, b) = halpern_coefficients(state.history.inner);
    for i in 0..state.x.len() {
        state.x[i] = halpern_component(t.x[i], state.x[i], state.x_anchor[i], a, b);
    }
    for i in 0..state.y.len() {
        state.y[i] = halpern_component(t.y[i], state.y[i], state.y_anchor[i], a, b);
        state.ax[i] = a * t.a_ext[i] + b * state.ax_anchor[i];
    }
    state.history.inner += 1;
    state.history.total += 1;
}

/// `‖T(z) − z‖_M`, reusing the products of `t`.
pub fn m_norm_residual(state: &IterateState, t: &TOutput) -> Result<f64> {
    let dx: Vec<f64> = t.x.iter().zip(&state.x).map(|(a, b)| a - b).collect();
    let dy: Vec<f64> = t.y.iter().zip(&state.y).map(|(a, b)| a - b).collect();
    let adx: Vec<f64> = t.a_ext.iter().zip(&state.ax).map(|(e, ax)| 0.5 * (e - ax)).collect();
    m_norm(&dx, &dy, &adx, &state.params)
}

/// Smooths the primal weight from the displacement between the current
/// iterate (the next anchor) and the current anchor.
pub fn update_primal_weight(state: &mut IterateState, config: &SolverConfig) -> f64 {
    let dx = state.x.iter().zip(&state.x_anchor).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let dy = state.y.iter().zip(&state.y_anchor).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let w = smooth_primal_weight(state.params.w, dx, dy, config.theta);
    state.params = state.params.with_weight(w);
    w
}

/// Re-anchors at the current iterate whose residual is `r`.
pub fn restart(state: &mut IterateState, problem: &LpProblem, config: &SolverConfig, kind: RestartKind, r: f64) -> Result<RestartEvent> {
    update_primal_weight(state, config);
    let event = RestartEvent {
        iteration: state.history.total,
        kind,
        old_anchor_residual: state.history.anchor_residual.unwrap_or(f64::NAN),
        new_anchor_residual: r,
    };
    if kind == RestartKind::Sufficient {
        debug_assert!(event.new_anchor_residual <= event.old_anchor_residual);
    }
    state.x_anchor.copy_from_slice(&state.x);
    state.y_anchor.copy_from_slice(&state.y);
    problem.a.spmv(Op::Plain, &state.x_anchor, &mut state.ax_anchor)?;
    state.ax.copy_from_slice(&state.ax_anchor);
    state.history.anchor_residual = Some(r);
    state.history.inner = 0;
    state.restarts += 1;
    state.restart_counts.record(kind);
    Ok(event)
}

/// Outcome of the periodic checks.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Running(OptimalityMetrics),
    Optimal(OptimalityMetrics, Vec<f64>),
    Infeasible(OptimalityMetrics, Vec<f64>, Certificate),
}

/// Stopping test at the `T` image `(x̃, ỹ)`. Returns the metrics and the
/// reduced cost.
pub fn check_termination(t: &TOutput, problem: &LpProblem, config: &SolverConfig) -> Result<(OptimalityMetrics, Vec<f64>)> {
    let (metrics, rc, _, _) = termination_parts(t, problem, config)?;
    Ok((metrics, rc))
}

type TerminationParts = (OptimalityMetrics, Vec<f64>, Vec<f64>, Vec<f64>);

fn termination_parts(t: &TOutput, problem: &LpProblem, config: &SolverConfig) -> Result<TerminationParts> {
    let mut axt = vec![0.0; problem.n_rows()];
    let mut atyt = vec![0.0; problem.n_cols()];
    problem.a.spmv(Op::Plain, &t.x, &mut axt)?;
    problem.a.spmv(Op::Transpose, &t.y, &mut atyt)?;
    let (metrics, rc) = optimality(&view(problem), &t.x, &axt, &t.y, &atyt, config);
    Ok((metrics, rc, axt, atyt))
}

/// Displacement-probe infeasibility test.
pub fn check_infeasibility(state: &IterateState, t: &TOutput, problem: &LpProblem, config: &SolverConfig) -> Result<Option<Certificate>> {
    let (m, n) = (problem.n_rows(), problem.n_cols());
    let mut axt = vec![0.0; m];
    let mut atyt = vec![0.0; n];
    problem.a.spmv(Op::Plain, &t.x, &mut axt)?;
    problem.a.spmv(Op::Transpose, &t.y, &mut atyt)?;
    probe(state, t, problem, config, &axt, &atyt)
}

fn probe(state: &IterateState, t: &TOutput, problem: &LpProblem, config: &SolverConfig, axt: &[f64], atyt: &[f64]) -> Result<Option<Certificate>> {
    let mut dy = vec![0.0; problem.n_rows()];
    dual_displacement(&state.y, &t.y, &problem.row_bounds, &mut dy);
    let mut atdy = vec![0.0; problem.n_cols()];
    problem.a.spmv(Op::Transpose, &dy, &mut atdy)?;
    let inputs = ProbeInputs {
        x: &state.x,
        ax: &state.ax,
        aty: &t.aty,
        xt: &t.x,
        axt,
        atyt,
        dy: &dy,
        atdy: &atdy,
    };
    Ok(infeasibility(&view(problem), &inputs, config))
}

fn view(problem: &LpProblem) -> ColumnView<'_> {
    ColumnView {
        c: &problem.c,
        var: &problem.var_bounds,
        rows: &problem.row_bounds,
    }
}

/// Iteration driver with inspectable state.
pub struct SingleSolver<'a> {
    problem: &'a LpProblem,
    config: SolverConfig,
    state: IterateState,
    t: TOutput,
    last_metrics: OptimalityMetrics,
    last_reduced_cost: Vec<f64>,
    spmv_count: usize,
    trace: Option<Trace>,
}

impl<'a> SingleSolver<'a> {
    pub fn new(problem: &'a LpProblem, config: &SolverConfig, initial: Option<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        config.validate()?;
        let diag = validate(problem);
        if let Some(e) = diag.errors().next() {
            return Err(Error::InvalidProblem(e.message.clone()));
        }
        let params = StepParams::new(step_size(&problem.a)?, config.w_init);
        let state = match initial {
            Some((x, y)) => IterateState::new(problem, x, y, params)?,
            None => IterateState::cold(problem, params)?,
        };
        Ok(SingleSolver {
            problem,
            config: config.clone(),
            t: TOutput::zeros(problem),
            state,
            last_metrics: OptimalityMetrics::default(),
            last_reduced_cost: vec![0.0; problem.n_cols()],
            spmv_count: 0,
            trace: config.trace.then(Trace::default),
        })
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    pub fn last_t(&self) -> &TOutput {
        &self.t
    }

    /// Sparse matrix-vector products issued so far.
    pub fn spmv_count(&self) -> usize {
        self.spmv_count
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    /// One iteration; `Some` once the solve has finished.
    pub fn iterate(&mut self) -> Result<Option<SolveResult>> {
        let cfg = &self.config.clone();
        apply_t(&self.state, self.problem, &mut self.t)?;
        self.spmv_count += 2;
        let r = m_norm_residual(&self.state, &self.t)?;
        if let Some(tr) = self.trace.as_mut() {
            tr.residuals.push(r);
        }

        let total = self.state.history.total;
        if total.is_multiple_of(cfg.termination_check_period) || total >= cfg.max_iterations {
            match self.check()? {
                CheckOutcome::Optimal(m, rc) => return Ok(Some(self.result(Status::Optimal, m, rc, None))),
                CheckOutcome::Infeasible(m, rc, cert) => {
                    let status = match cert {
                        Certificate::Primal { .. } => Status::PrimalInfeasible,
                        Certificate::Dual { .. } => Status::DualInfeasible,
                    };
                    return Ok(Some(self.result(status, m, rc, Some(cert))));
                }
                CheckOutcome::Running(_) => {}
            }
            if total >= cfg.max_iterations {
                let (m, rc) = (self.last_metrics, self.last_reduced_cost.clone());
                return Ok(Some(self.result(Status::IterationLimit, m, rc, None)));
            }
        }

        match evaluate_restart(r, &self.state.history, cfg) {
            RestartDecision::Restart(kind) => {
                let ev = restart(&mut self.state, self.problem, cfg, kind, r)?;
                self.spmv_count += 1;
                if let Some(tr) = self.trace.as_mut() {
                    tr.restarts.push(ev);
                }
            }
            RestartDecision::Continue => {
                if self.state.history.anchor_residual.is_none() {
                    self.state.history.anchor_residual = Some(r);
                }
            }
        }
        halpern_step(&mut self.state, &self.t);
        self.state.history.previous_residual = Some(r);
        if let Some(tr) = self.trace.as_mut() {
            let h = super::checksum(super::checksum(0, &self.state.x), &self.state.y);
            tr.checksums.push(h);
        }
        Ok(None)
    }

    fn check(&mut self) -> Result<CheckOutcome> {
        let (metrics, rc, axt, atyt) = termination_parts(&self.t, self.problem, &self.config)?;
        self.spmv_count += 2;
        self.last_metrics = metrics;
        self.last_reduced_cost = rc.clone();
        if metrics.is_optimal() {
            return Ok(CheckOutcome::Optimal(metrics, rc));
        }
        let cert = probe(&self.state, &self.t, self.problem, &self.config, &axt, &atyt)?;
        self.spmv_count += 1;
        Ok(match cert {
            Some(c) => CheckOutcome::Infeasible(metrics, rc, c),
            None => CheckOutcome::Running(metrics),
        })
    }

    fn result(&self, status: Status, metrics: OptimalityMetrics, r: Vec<f64>, certificate: Option<Certificate>) -> SolveResult {
        SolveResult {
            status,
            objective: metrics.primal_objective,
            dual_objective: metrics.dual_objective,
            x: self.t.x.clone(),
            y: self.t.y.clone(),
            r,
            iterations: self.state.history.total,
            restarts: self.state.restarts,
            restart_counts: self.state.restart_counts,
            primal_weight: self.state.params.w,
            metrics,
            certificate,
        }
    }

    pub fn run(mut self) -> Result<(SolveResult, Option<Trace>)> {
        loop {
            if let Some(res) = self.iterate()? {
                return Ok((res, self.trace.take()));
            }
        }
    }
}

/// Solves `problem` from the cold start or from `initial`.
pub fn solve(problem: &LpProblem, config: &SolverConfig, initial: Option<(Vec<f64>, Vec<f64>)>) -> Result<SolveResult> {
    Ok(SingleSolver::new(problem, config, initial)?.run()?.0)
}

/// Like [`solve`] but also returns the trace (forces tracing on).
pub fn solve_traced(problem: &LpProblem, config: &SolverConfig, initial: Option<(Vec<f64>, Vec<f64>)>) -> Result<(SolveResult, Trace)> {
    let cfg = SolverConfig {
        trace: true,
        ..config.clone()
    };
    let (res, tr) = SingleSolver::new(problem, &cfg, initial)?.run()?;
    Ok((res, tr.unwrap_or_default()))
}
