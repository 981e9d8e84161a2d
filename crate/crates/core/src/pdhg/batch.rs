//! Batched reflected-Halpern PDHG over `N` problems sharing `A`.
//!
//! Iterates are stored as column blocks. Columns `0..active` are running;
//! whenever a column finishes it is swapped with the last running column and
//! the active width shrinks, so every sparse product only touches unsolved
//! problems. `perm[p]` is the original index of the problem at position `p`.

use crate::bounds::clamp;
use crate::error::{Error, Result};
use crate::model::{validate, BaseObjective, BatchProblem, LpProblem, ResolvedColumn};
use crate::sparse::{spmm_into, DenseBlock, Op};

use super::{
    checksum, dual_component, dual_displacement, evaluate_restart, halpern_coefficients, halpern_component,
    infeasibility, m_norm, optimality, primal_component, smooth_primal_weight, step_size, Certificate, ColumnView,
    OptimalityMetrics, ProbeInputs, RestartCounts, RestartDecision, RestartEvent, RestartHistory, RestartKind,
    SolveResult, SolverConfig, Status, StepParams, Trace,
};

/// Output of [`solve_batch`]; `results[j]` belongs to original column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub results: Vec<SolveResult>,
    /// Batch iterations performed.
    pub iterations: usize,
    pub restarts: usize,
    pub restart_counts: RestartCounts,
    /// Sparse matrix-matrix products issued.
    pub spmm_count: usize,
    pub trace: Option<Trace>,
}

impl BatchResult {
    pub fn count(&self, status: Status) -> usize {
        self.results.iter().filter(|r| r.status == status).count()
    }
}

/// Iteration driver with inspectable state.
pub struct BatchSolver<'a> {
    problem: &'a BatchProblem,
    config: SolverConfig,
    permute: bool,
    width: usize,
    active: usize,
    perm: Vec<usize>,
    running: Vec<bool>,
    x: DenseBlock,
    y: DenseBlock,
    x_anchor: DenseBlock,
    y_anchor: DenseBlock,
    ax: DenseBlock,
    ax_anchor: DenseBlock,
    xt: DenseBlock,
    yt: DenseBlock,
    aty: DenseBlock,
    ext: DenseBlock,
    a_ext: DenseBlock,
    sweep_axt: DenseBlock,
    sweep_atyt: DenseBlock,
    sweep_dy: DenseBlock,
    sweep_atdy: DenseBlock,
    params: Vec<StepParams>,
    residuals: Vec<f64>,
    frozen_residual: Vec<f64>,
    history: RestartHistory,
    anchor_iteration: usize,
    restarts: usize,
    restart_counts: RestartCounts,
    results: Vec<Option<SolveResult>>,
    last_metrics: Vec<OptimalityMetrics>,
    last_rc: Vec<Vec<f64>>,
    spmm_count: usize,
    trace: Option<Trace>,
    workspace: BatchWorkspace,
}

/// Reusable storage for the iterate blocks of successive batch solves.
///
/// Allocations grow to the largest batch seen (the high-water mark) and are
/// never shrunk, so a later, smaller batch reuses them.
#[derive(Debug, Default)]
pub struct BatchWorkspace {
    blocks: Vec<DenseBlock>,
    high_water: usize,
}

impl BatchWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Largest batch width served so far.
    pub fn high_water_mark(&self) -> usize {
        self.high_water
    }

    /// Total `f64` capacity currently held.
    pub fn capacity(&self) -> usize {
        self.blocks.iter().map(DenseBlock::capacity).sum()
    }

    fn take(&mut self, n_rows: usize, n_cols: usize) -> DenseBlock {
        let mut b = self.blocks.pop().unwrap_or_else(|| DenseBlock::zeros(0, 0));
        b.reset(n_rows, n_cols);
        b
    }
}

impl<'a> BatchSolver<'a> {
    pub fn new(problem: &'a BatchProblem, config: &SolverConfig) -> Result<Self> {
        Self::build(problem, config, true, BatchWorkspace::new())
    }

    /// `permute = false` keeps finished columns in place (reference path
    /// for testing; products then always span the full width).
    pub fn with_permutation(problem: &'a BatchProblem, config: &SolverConfig, permute: bool) -> Result<Self> {
        Self::build(problem, config, permute, BatchWorkspace::new())
    }

    pub fn with_workspace(problem: &'a BatchProblem, config: &SolverConfig, workspace: BatchWorkspace) -> Result<Self> {
        Self::build(problem, config, true, workspace)
    }

    fn build(problem: &'a BatchProblem, config: &SolverConfig, permute: bool, mut ws: BatchWorkspace) -> Result<Self> {
        config.validate()?;
        let base = problem.base();
        if let Some(e) = validate(base).errors().next() {
            return Err(Error::InvalidProblem(e.message.clone()));
        }
        let (m, n, width) = (base.n_rows(), base.n_cols(), problem.width());
        let eta = step_size(&base.a)?;

        let mut results = vec![None; width];
        let mut order: Vec<usize> = Vec::with_capacity(width);
        let mut presets = Vec::new();
        for j in 0..width {
            match problem.preset(j) {
                Some(p) => {
                    results[j] = Some(SolveResult::preset(p.status, p.objective));
                    presets.push(j);
                }
                None => order.push(j),
            }
        }
        let active = order.len();
        order.extend(presets);

        ws.high_water = ws.high_water.max(width);
        let mut x = ws.take(n, width);
        for (p, &j) in order.iter().enumerate().take(active) {
            let col = problem.resolve_column(j)?;
            let xc = x.col_mut(p);
            for (i, v) in xc.iter_mut().enumerate() {
                *v = clamp(0.0, col.var_lower(i), col.var_upper(i));
            }
        }
        let y = ws.take(m, width);
        let mut ax = ws.take(m, width);
        let spmm_width = if permute { active } else { width };
        spmm_into(&base.a, &x, Op::Plain, spmm_width, &mut ax)?;
        let mut x_anchor = ws.take(n, width);
        x_anchor.data_mut().copy_from_slice(x.data());
        let y_anchor = ws.take(m, width);
        let mut ax_anchor = ws.take(m, width);
        ax_anchor.data_mut().copy_from_slice(ax.data());

        let mut running = vec![false; width];
        running[..active].iter_mut().for_each(|r| *r = true);
        Ok(BatchSolver {
            problem,
            config: config.clone(),
            permute,
            width,
            active: if permute { active } else { width },
            perm: order,
            running,
            xt: ws.take(n, width),
            yt: ws.take(m, width),
            aty: ws.take(n, width),
            ext: ws.take(n, width),
            a_ext: ws.take(m, width),
            sweep_axt: ws.take(m, width),
            sweep_atyt: ws.take(n, width),
            sweep_dy: ws.take(m, width),
            sweep_atdy: ws.take(n, width),
            x,
            y,
            x_anchor,
            y_anchor,
            ax,
            ax_anchor,
            params: vec![StepParams::new(eta, config.w_init); width],
            residuals: vec![0.0; width],
            frozen_residual: vec![0.0; width],
            history: RestartHistory::default(),
            anchor_iteration: 0,
            restarts: 0,
            restart_counts: RestartCounts::default(),
            results,
            last_metrics: vec![OptimalityMetrics::default(); width],
            last_rc: vec![Vec::new(); width],
            spmm_count: 1,
            trace: config.trace.then(Trace::default),
            workspace: ws,
        })
    }

    /// Returns the iterate storage for reuse by a later batch.
    pub fn into_workspace(self) -> BatchWorkspace {
        let mut ws = self.workspace;
        ws.blocks.extend([
            self.sweep_atdy,
            self.sweep_dy,
            self.sweep_atyt,
            self.sweep_axt,
            self.a_ext,
            self.ext,
            self.aty,
            self.yt,
            self.xt,
            self.ax_anchor,
            self.y_anchor,
            self.x_anchor,
            self.ax,
            self.y,
            self.x,
        ]);
        ws
    }

    /// Overrides the starting primal weight of each column, indexed by
    /// original column. Only allowed before the first iteration.
    pub fn set_primal_weights(&mut self, weights: &[f64]) -> Result<()> {
        if self.history.total != 0 || self.history.anchor_residual.is_some() {
            return Err(Error::InvalidConfig("primal weights can only be set before iterating".into()));
        }
        if weights.len() != self.width {
            return Err(Error::DimensionMismatch(format!("{} weights for {} columns", weights.len(), self.width)));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidConfig(format!("primal weight must be positive and finite, got {w}")));
        }
        for p in 0..self.width {
            self.params[p] = self.params[p].with_weight(weights[self.perm[p]]);
        }
        Ok(())
    }

    /// Number of columns still iterating.
    pub fn active_width(&self) -> usize {
        if self.permute {
            self.active
        } else {
            self.running.iter().filter(|r| **r).count()
        }
    }

    /// Position → original column index.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn primal_block(&self) -> &DenseBlock {
        &self.x
    }

    pub fn dual_block(&self) -> &DenseBlock {
        &self.y
    }

    pub fn step_params(&self) -> &[StepParams] {
        &self.params
    }

    pub fn history(&self) -> &RestartHistory {
        &self.history
    }

    /// Iteration at which every active column was last anchored.
    pub fn anchor_iteration(&self) -> usize {
        self.anchor_iteration
    }

    pub fn spmm_count(&self) -> usize {
        self.spmm_count
    }

    /// Result slots in original order; `Some` once a column has finished.
    pub fn results(&self) -> &[Option<SolveResult>] {
        &self.results
    }

    /// Checksum of every frozen column's iterate block and stored result.
    pub fn frozen_checksum(&self) -> u64 {
        let mut h = 0u64;
        for p in 0..self.width {
            if !self.running[p] {
                h = checksum(h, self.x.col(p));
                h = checksum(h, self.y.col(p));
                if let Some(r) = &self.results[self.perm[p]] {
                    h = checksum(h, &r.x);
                    h = checksum(h, &r.y);
                    h = checksum(h, &[r.objective, r.iterations as f64]);
                }
            }
        }
        h
    }

    fn column(&self, p: usize) -> ResolvedColumn<'a> {
        self.problem
            .resolve_column(self.perm[p])
            .expect("permutation entries are valid column indices")
    }

    fn products(&mut self, src: Which, op: Op, dst: Which) -> Result<()> {
        let a = &self.problem.base().a;
        let width = self.active;
        let (input, output) = match (src, dst) {
            (Which::Y, Which::Aty) => (&self.y, &mut self.aty),
            (Which::Ext, Which::AExt) => (&self.ext, &mut self.a_ext),
            (Which::XAnchor, Which::AxAnchor) => (&self.x_anchor, &mut self.ax_anchor),
            _ => unreachable!("unsupported product"),
        };
        spmm_into(a, input, op, width, output)?;
        self.spmm_count += 1;
        Ok(())
    }

    /// One batch iteration; `Some` once every column has finished.
    pub fn iterate(&mut self) -> Result<Option<BatchResult>> {
        let base = self.problem.base();
        let (m, n) = (base.n_rows(), base.n_cols());

        // T(Z)
        self.products(Which::Y, Op::Transpose, Which::Aty)?;
        for p in 0..self.active {
            if !self.running[p] {
                continue;
            }
            let col = self.column(p);
            let tau = self.params[p].tau;
            let x = self.x.col(p);
            let aty = self.aty.col(p);
            let xt = &mut self.xt.data_mut()[p * n..(p + 1) * n];
            let (lo, hi) = (&col.var_bounds.lower, &col.var_bounds.upper);
            match col.objective {
                BaseObjective::Shared(c) => {
                    for i in 0..n {
                        xt[i] = primal_component(x[i], aty[i], c[i], tau, lo[i], hi[i]);
                    }
                }
                BaseObjective::Unit { .. } => {
                    for i in 0..n {
                        xt[i] = primal_component(x[i], aty[i], col.base_objective(i), tau, lo[i], hi[i]);
                    }
                }
            }
            for i in col.patched_variables() {
                xt[i] = primal_component(x[i], aty[i], col.objective(i), tau, col.var_lower(i), col.var_upper(i));
            }
            let ext = &mut self.ext.data_mut()[p * n..(p + 1) * n];
            for i in 0..n {
                ext[i] = 2.0 * xt[i] - x[i];
            }
        }
        self.products(Which::Ext, Op::Plain, Which::AExt)?;
        let rb = &base.row_bounds;
        let mut dx = vec![0.0; n];
        let mut dy = vec![0.0; m];
        let mut adx = vec![0.0; m];
        for p in 0..self.active {
            if !self.running[p] {
                continue;
            }
            let sigma = self.params[p].sigma;
            let y = self.y.col(p);
            let a_ext = self.a_ext.col(p);
            let yt = &mut self.yt.data_mut()[p * m..(p + 1) * m];
            for i in 0..m {
                yt[i] = dual_component(y[i], a_ext[i], sigma, rb.lower[i], rb.upper[i]);
            }
            let (xt, x) = (self.xt.col(p), self.x.col(p));
            for i in 0..n {
                dx[i] = xt[i] - x[i];
            }
            let ax = self.ax.col(p);
            let yt = self.yt.col(p);
            for i in 0..m {
                dy[i] = yt[i] - y[i];
                adx[i] = 0.5 * (a_ext[i] - ax[i]);
            }
            self.residuals[p] = m_norm(&dx, &dy, &adx, &self.params[p])?;
        }

        let avg = self.average_residual();
        if let Some(tr) = self.trace.as_mut() {
            tr.residuals.push(avg);
        }
        let total = self.history.total;
        if total.is_multiple_of(self.config.termination_check_period) || total >= self.config.max_iterations {
            self.sweep()?;
            if self.active_width() == 0 {
                return Ok(Some(self.finish()));
            }
            if total >= self.config.max_iterations {
                for p in 0..self.active {
                    if self.running[p] {
                        let j = self.perm[p];
                        let (metrics, rc) = (self.last_metrics[j], self.last_rc[j].clone());
                        self.results[j] = Some(self.column_result(p, Status::IterationLimit, metrics, rc, None));
                        self.running[p] = false;
                    }
                }
                return Ok(Some(self.finish()));
            }
        }

        let avg = self.average_residual();
        match evaluate_restart(avg, &self.history, &self.config) {
            RestartDecision::Restart(kind) => self.restart(kind, avg)?,
            RestartDecision::Continue => {
                if self.history.anchor_residual.is_none() {
                    self.history.anchor_residual = Some(avg);
                }
            }
        }

        let (a, b) = halpern_coefficients(self.history.inner);
        for p in 0..self.active {
            if !self.running[p] {
                continue;
            }
            let (xt, xa) = (self.xt.col(p), self.x_anchor.col(p));
            let x = &mut self.x.data_mut()[p * n..(p + 1) * n];
            for i in 0..n {
                x[i] = halpern_component(xt[i], x[i], xa[i], a, b);
            }
            let (yt, ya, a_ext, axa) = (self.yt.col(p), self.y_anchor.col(p), self.a_ext.col(p), self.ax_anchor.col(p));
            let y = &mut self.y.data_mut()[p * m..(p + 1) * m];
            for i in 0..m {
                y[i] = halpern_component(yt[i], y[i], ya[i], a, b);
            }
            let ax = &mut self.ax.data_mut()[p * m..(p + 1) * m];
            for i in 0..m {
                ax[i] = a * a_ext[i] + b * axa[i];
            }
        }
        self.history.inner += 1;
        self.history.total += 1;
        self.history.previous_residual = Some(avg);
        if let Some(tr) = self.trace.as_mut() {
            let mut h = 0;
            for p in 0..self.active {
                if self.running[p] {
                    h = checksum(h, self.x.col(p));
                    h = checksum(h, self.y.col(p));
                }
            }
            tr.checksums.push(h);
        }
        Ok(None)
    }

    fn average_residual(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for p in 0..self.active {
            if self.running[p] {
                sum += self.residuals[p];
                count += 1;
            }
        }
        if self.config.average_over_all_columns {
            for p in 0..self.width {
                if !self.running[p] {
                    sum += self.frozen_residual[self.perm[p]];
                }
            }
            return sum / self.width as f64;
        }
        sum / count.max(1) as f64
    }

    fn restart(&mut self, kind: RestartKind, avg: f64) -> Result<()> {
        let (m, n) = (self.problem.base().n_rows(), self.problem.base().n_cols());
        for p in 0..self.active {
            if !self.running[p] {
                continue;
            }
            let (x, xa) = (self.x.col(p), self.x_anchor.col(p));
            let dxn = (0..n).map(|i| (x[i] - xa[i]) * (x[i] - xa[i])).sum::<f64>().sqrt();
            let (y, ya) = (self.y.col(p), self.y_anchor.col(p));
            let dyn_ = (0..m).map(|i| (y[i] - ya[i]) * (y[i] - ya[i])).sum::<f64>().sqrt();
            let w = smooth_primal_weight(self.params[p].w, dxn, dyn_, self.config.theta);
            self.params[p] = self.params[p].with_weight(w);
        }
        let event = RestartEvent {
            iteration: self.history.total,
            kind,
            old_anchor_residual: self.history.anchor_residual.unwrap_or(f64::NAN),
            new_anchor_residual: avg,
        };
        for p in 0..self.active {
            if !self.running[p] {
                continue;
            }
            self.x_anchor.col_mut(p).copy_from_slice(self.x.col(p));
            self.y_anchor.col_mut(p).copy_from_slice(self.y.col(p));
        }
        self.products(Which::XAnchor, Op::Plain, Which::AxAnchor)?;
        for p in 0..self.active {
            if self.running[p] {
                self.ax.col_mut(p).copy_from_slice(self.ax_anchor.col(p));
            }
        }
        self.history.anchor_residual = Some(avg);
        self.history.inner = 0;
        self.anchor_iteration = self.history.total;
        self.restarts += 1;
        self.restart_counts.record(kind);
        if let Some(tr) = self.trace.as_mut() {
            tr.restarts.push(event);
        }
        Ok(())
    }

    /// Termination and infeasibility tests on every running column; moves
    /// finished columns behind the active range.
    fn sweep(&mut self) -> Result<()> {
        let base = self.problem.base();
        let a = &base.a;
        let width = self.active;
        let mut axt = std::mem::replace(&mut self.sweep_axt, DenseBlock::zeros(0, 0));
        let mut atyt = std::mem::replace(&mut self.sweep_atyt, DenseBlock::zeros(0, 0));
        let mut dyb = std::mem::replace(&mut self.sweep_dy, DenseBlock::zeros(0, 0));
        let mut atdy = std::mem::replace(&mut self.sweep_atdy, DenseBlock::zeros(0, 0));
        spmm_into(a, &self.xt, Op::Plain, width, &mut axt)?;
        spmm_into(a, &self.yt, Op::Transpose, width, &mut atyt)?;
        for p in 0..width {
            if self.running[p] {
                dual_displacement(self.y.col(p), self.yt.col(p), &base.row_bounds, dyb.col_mut(p));
            }
        }
        spmm_into(a, &dyb, Op::Transpose, width, &mut atdy)?;
        self.spmm_count += 3;

        let mut finished: Vec<(usize, SolveResult)> = Vec::new();
        for p in 0..width {
            if !self.running[p] {
                continue;
            }
            let col = self.column(p);
            let c = col.objective_vector();
            let var = col.var_bounds_resolved();
            let view = ColumnView {
                c: &c,
                var: &var,
                rows: &base.row_bounds,
            };
            let (metrics, rc) = optimality(&view, self.xt.col(p), axt.col(p), self.yt.col(p), atyt.col(p), &self.config);
            let j = self.perm[p];
            self.last_metrics[j] = metrics;
            self.last_rc[j] = rc.clone();
            if metrics.is_optimal() {
                finished.push((j, self.column_result(p, Status::Optimal, metrics, rc, None)));
                continue;
            }
            let inputs = ProbeInputs {
                x: self.x.col(p),
                ax: self.ax.col(p),
                aty: self.aty.col(p),
                xt: self.xt.col(p),
                axt: axt.col(p),
                atyt: atyt.col(p),
                dy: dyb.col(p),
                atdy: atdy.col(p),
            };
            if let Some(cert) = infeasibility(&view, &inputs, &self.config) {
                let status = match cert {
                    Certificate::Primal { .. } => Status::PrimalInfeasible,
                    Certificate::Dual { .. } => Status::DualInfeasible,
                };
                finished.push((j, self.column_result(p, status, metrics, rc, Some(cert))));
            }
        }
        self.sweep_axt = axt;
        self.sweep_atyt = atyt;
        self.sweep_dy = dyb;
        self.sweep_atdy = atdy;
        finished.sort_by_key(|(j, _)| *j);
        for (j, res) in finished {
            let p = self.perm.iter().position(|&q| q == j).expect("finished column is present");
            self.frozen_residual[j] = self.residuals[p];
            self.results[j] = Some(res);
            self.running[p] = false;
            if self.permute {
                let last = self.active - 1;
                self.swap(p, last);
                self.active -= 1;
            }
        }
        Ok(())
    }

    fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for blk in [
            &mut self.x,
            &mut self.y,
            &mut self.x_anchor,
            &mut self.y_anchor,
            &mut self.ax,
            &mut self.ax_anchor,
            &mut self.xt,
            &mut self.yt,
            &mut self.aty,
            &mut self.ext,
            &mut self.a_ext,
        ] {
            blk.swap_cols(a, b);
        }
        self.params.swap(a, b);
        self.residuals.swap(a, b);
        self.perm.swap(a, b);
        self.running.swap(a, b);
    }

    fn column_result(&self, p: usize, status: Status, metrics: OptimalityMetrics, r: Vec<f64>, certificate: Option<Certificate>) -> SolveResult {
        SolveResult {
            status,
            objective: metrics.primal_objective,
            dual_objective: metrics.dual_objective,
            x: self.xt.col(p).to_vec(),
            y: self.yt.col(p).to_vec(),
            r,
            iterations: self.history.total,
            restarts: self.restarts,
            restart_counts: self.restart_counts,
            primal_weight: self.params[p].w,
            metrics,
            certificate,
        }
    }

    fn finish(&mut self) -> BatchResult {
        BatchResult {
            results: self
                .results
                .iter_mut()
                .map(|r| r.take().expect("every column has a result when the batch finishes"))
                .collect(),
            iterations: self.history.total,
            restarts: self.restarts,
            restart_counts: self.restart_counts,
            spmm_count: self.spmm_count,
            trace: self.trace.take(),
        }
    }

    pub fn run(mut self) -> Result<BatchResult> {
        if self.active_width() == 0 {
            return Ok(self.finish());
        }
        loop {
            if let Some(res) = self.iterate()? {
                return Ok(res);
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Which {
    Y,
    Aty,
    Ext,
    AExt,
    XAnchor,
    AxAnchor,
}

/// Solves every column of `problem`; results come back in original order.
pub fn solve_batch(problem: &BatchProblem, config: &SolverConfig) -> Result<BatchResult> {
    BatchSolver::new(problem, config)?.run()
}

/// Like [`solve_batch`], reusing and then refilling `workspace`.
pub fn solve_batch_in(problem: &BatchProblem, config: &SolverConfig, workspace: &mut BatchWorkspace) -> Result<BatchResult> {
    let ws = std::mem::take(workspace);
    let mut solver = BatchSolver::with_workspace(problem, config, ws)?;
    let result = if solver.active_width() == 0 {
        solver.finish()
    } else {
        loop {
            if let Some(res) = solver.iterate()? {
                break res;
            }
        }
    };
    *workspace = solver.into_workspace();
    Ok(result)
}

/// Convenience: a batch of independent copies of one problem.
pub fn solve_replicated(problem: &LpProblem, width: usize, config: &SolverConfig) -> Result<BatchResult> {
    let batch = BatchProblem::replicate(problem.clone(), width)?;
    solve_batch(&batch, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{Bounds, Interval};
    use crate::model::{ColumnOverride, ObjectiveMode, OverrideKind, PresetOutcome};
    use crate::pdhg::single::{apply_t, solve_traced, IterateState, TOutput};
    use crate::sparse::SparseMatrix;

    const INF: f64 = f64::INFINITY;

    fn knap() -> LpProblem {
        LpProblem::new(
            SparseMatrix::from_dense(&[vec![2.0, 3.0, 1.0], vec![1.0, -1.0, 2.0]], 3).unwrap(),
            vec![-3.0, -4.0, -1.0],
            Bounds::from_intervals(&[Interval::new(-INF, 4.0), Interval::new(-1.0, 2.0)]),
            Bounds::uniform(3, Interval::new(0.0, 1.0)),
        )
        .unwrap()
    }

    #[test]
    fn batch_of_one_matches_single_t() {
        let p = knap();
        let batch = BatchProblem::replicate(p.clone(), 1).unwrap();
        let mut bs = BatchSolver::new(&batch, &SolverConfig::default()).unwrap();
        let eta = bs.step_params()[0].eta;
        let s = IterateState::cold(&p, StepParams::new(eta, 1.0)).unwrap();
        let mut t = TOutput::zeros(&p);
        apply_t(&s, &p, &mut t).unwrap();
        bs.iterate().unwrap();
        assert_eq!(bs.xt.col(0), &t.x[..]);
        assert_eq!(bs.yt.col(0), &t.y[..]);
    }

    #[test]
    fn batch_of_one_trajectory_is_identical() {
        let p = knap();
        let cfg = SolverConfig {
            eps_opt: 1e-7,
            trace: true,
            ..Default::default()
        };
        let (single, strace) = solve_traced(&p, &cfg, None).unwrap();
        let batch = BatchProblem::replicate(p, 1).unwrap();
        let res = solve_batch(&batch, &cfg).unwrap();
        let btrace = res.trace.unwrap();
        assert_eq!(strace.residuals, btrace.residuals);
        assert_eq!(strace.checksums, btrace.checksums);
        assert_eq!(res.results[0], single);
    }

    #[test]
    fn duplicate_columns_stay_identical() {
        let batch = BatchProblem::replicate(knap(), 3).unwrap();
        let mut bs = BatchSolver::new(&batch, &SolverConfig::with_eps(1e-7)).unwrap();
        for _ in 0..200 {
            if bs.iterate().unwrap().is_some() {
                break;
            }
            if bs.active_width() == 3 {
                assert_eq!(bs.x.col(0), bs.x.col(1));
                assert_eq!(bs.x.col(1), bs.x.col(2));
                assert_eq!(bs.y.col(0), bs.y.col(2));
            }
        }
    }

    #[test]
    fn presets_are_returned_without_solving() {
        let mut batch = BatchProblem::replicate(knap(), 2).unwrap();
        batch
            .set_preset(1, PresetOutcome { status: Status::PrimalInfeasible, objective: INF })
            .unwrap();
        let res = solve_batch(&batch, &SolverConfig::default()).unwrap();
        assert_eq!(res.results[0].status, Status::Optimal);
        assert_eq!(res.results[1].status, Status::PrimalInfeasible);
        assert_eq!(res.results[1].iterations, 0);
    }

    #[test]
    fn swap_moves_finished_column_to_the_back() {
        // column 1 is infeasible (x₀ ≥ 1 and x₁ ≥ 1 break row 0 when capped at 1.5)
        let p = LpProblem::new(
            SparseMatrix::from_dense(&[vec![1.0, 1.0]], 2).unwrap(),
            vec![1.0, 1.0],
            Bounds::from_intervals(&[Interval::new(-INF, 1.5)]),
            Bounds::uniform(2, Interval::new(0.0, 1.0)),
        )
        .unwrap();
        let ovs = vec![
            ColumnOverride { column: 1, kind: OverrideKind::VariableLower, variable: 0, value: 1.0 },
            ColumnOverride { column: 1, kind: OverrideKind::VariableLower, variable: 1, value: 1.0 },
        ];
        let batch = BatchProblem::new(p, 4, ObjectiveMode::Shared, ovs, None).unwrap();
        let res = solve_batch(&batch, &SolverConfig::default()).unwrap();
        assert_eq!(res.results[1].status, Status::PrimalInfeasible);
        for j in [0, 2, 3] {
            assert_eq!(res.results[j].status, Status::Optimal);
        }
    }

    #[test]
    fn all_columns_finish_together() {
        let batch = BatchProblem::replicate(knap(), 4).unwrap();
        let mut bs = BatchSolver::new(&batch, &SolverConfig::default()).unwrap();
        let res = loop {
            if let Some(r) = bs.iterate().unwrap() {
                break r;
            }
        };
        assert_eq!(res.count(Status::Optimal), 4);
        let its: Vec<_> = res.results.iter().map(|r| r.iterations).collect();
        assert!(its.iter().all(|&k| k == its[0]));
    }
}
