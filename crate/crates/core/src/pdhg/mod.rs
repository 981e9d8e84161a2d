//! Reflected-Halpern PDHG.
//!
//! [`single`] solves one LP, [`batch`] solves `N` LPs that share the
//! constraint matrix. Both drive the same per-component kernels defined
//! here, which is what makes a batch of width one reproduce the single
//! solver bit for bit.

pub mod batch;
pub mod single;

use serde::{Deserialize, Serialize};

use crate::bounds::{barrier_component, clamp, recession_component, support_term, Bounds};
use crate::error::{Error, Result};
use crate::sparse::{norm2, spectral_norm, SparseMatrix};

pub use batch::{solve_batch, solve_batch_in, solve_replicated, BatchResult, BatchSolver, BatchWorkspace};
pub use single::{solve, IterateState, SingleSolver};

/// Step size numerator: `η = STEP_NUMERATOR / ‖A‖₂`.
pub const STEP_NUMERATOR: f64 = 0.998;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedCostMode {
    /// `r = Π_B(−c − Aᵀy)`.
    Projection,
    /// As `Projection`, but a gradient entry on a finite bound that the
    /// primal iterate is far from is counted as dual residual instead of
    /// reduced cost. Keeps huge bounds out of the dual objective.
    PrimalAware,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative optimality tolerance.
    pub eps_opt: f64,
    /// Tolerance of the infeasibility certificates.
    pub eps_infeas: f64,
    /// Tighter tolerance for the dual residual test; `eps_opt` when unset.
    pub eps_dual: Option<f64>,
    /// Primal weight smoothing exponent.
    pub theta: f64,
    pub beta_sufficient: f64,
    pub beta_necessary: f64,
    pub beta_artificial: f64,
    pub max_iterations: usize,
    pub termination_check_period: usize,
    pub w_init: f64,
    pub reduced_cost: ReducedCostMode,
    /// Batch only: average the restart residual over all `N` columns
    /// (solved ones contribute their residual at freeze time) instead of
    /// over the active ones.
    pub average_over_all_columns: bool,
    /// Record per-iteration residuals and iterate checksums.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_opt: 1e-4,
            eps_infeas: 1e-8,
            eps_dual: None,
            theta: 0.5,
            beta_sufficient: 0.2,
            beta_necessary: 0.8,
            beta_artificial: 0.36,
            max_iterations: 100_000,
            termination_check_period: 64,
            w_init: 1.0,
            reduced_cost: ReducedCostMode::Projection,
            average_over_all_columns: false,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_eps(eps: f64) -> Self {
        SolverConfig {
            eps_opt: eps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.eps_opt > 0.0) || !(self.eps_infeas > 0.0) {
            return bad("tolerances must be positive");
        }
        if let Some(e) = self.eps_dual {
            if !(e > 0.0) {
                return bad("eps_dual must be positive");
            }
        }
        if !(0.0 < self.beta_sufficient && self.beta_sufficient < self.beta_necessary && self.beta_necessary < 1.0) {
            return bad("need 0 < beta_sufficient < beta_necessary < 1");
        }
        if !(self.beta_artificial > 0.0) {
            return bad("beta_artificial must be positive");
        }
        if !(0.0 < self.theta && self.theta <= 1.0) {
            return bad("theta must lie in (0, 1]");
        }
        if self.termination_check_period == 0 {
            return bad("termination_check_period must be at least 1");
        }
        if !(self.w_init > 0.0 && self.w_init.is_finite()) {
            return bad("w_init must be positive and finite");
        }
        Ok(())
    }

    pub fn dual_tolerance(&self) -> f64 {
        self.eps_dual.unwrap_or(self.eps_opt)
    }
}

/// `τ = η/w`, `σ = ηw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub eta: f64,
    pub w: f64,
    pub tau: f64,
    pub sigma: f64,
}

impl StepParams {
    pub fn new(eta: f64, w: f64) -> Self {
        StepParams {
            eta,
            w,
            tau: eta / w,
            sigma: eta * w,
        }
    }

    pub fn with_weight(&self, w: f64) -> Self {
        StepParams::new(self.eta, w)
    }
}

/// `η = 0.998 / ‖A‖₂`. A matrix without nonzeros imposes no coupling; its
/// norm is taken as one.
pub fn step_size(a: &SparseMatrix) -> Result<f64> {
    match spectral_norm(a) {
        Ok(norm) => Ok(STEP_NUMERATOR / norm),
        Err(Error::ZeroMatrix) => Ok(STEP_NUMERATOR),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::PrimalInfeasible => "primal_infeasible",
            Status::DualInfeasible => "dual_infeasible",
            Status::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartKind {
    Sufficient,
    Necessary,
    Artificial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestartDecision {
    Continue,
    Restart(RestartKind),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestartCounts {
    pub sufficient: usize,
    pub necessary: usize,
    pub artificial: usize,
}

impl RestartCounts {
    pub fn total(&self) -> usize {
        self.sufficient + self.necessary + self.artificial
    }

    pub(crate) fn record(&mut self, kind: RestartKind) {
        match kind {
            RestartKind::Sufficient => self.sufficient += 1,
            RestartKind::Necessary => self.necessary += 1,
            RestartKind::Artificial => self.artificial += 1,
        }
    }
}

/// Residual bookkeeping of the current outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RestartHistory {
    /// `r(z^{n,0})`; `None` until the first residual is known.
    pub anchor_residual: Option<f64>,
    /// `r(z^{n,k-1})`.
    pub previous_residual: Option<f64>,
    /// Inner index `k`.
    pub inner: usize,
    /// Total iterations `K`.
    pub total: usize,
}

/// The three restart rules applied to residual `r = r(z^{n,k})`.
pub fn evaluate_restart(r: f64, history: &RestartHistory, config: &SolverConfig) -> RestartDecision {
    let Some(r0) = history.anchor_residual else {
        return RestartDecision::Continue;
    };
    if history.inner == 0 {
        return RestartDecision::Continue;
    }
    if r <= config.beta_sufficient * r0 {
        return RestartDecision::Restart(RestartKind::Sufficient);
    }
    if let Some(prev) = history.previous_residual {
        if r <= config.beta_necessary * r0 && r > prev {
            return RestartDecision::Restart(RestartKind::Necessary);
        }
    }
    if history.inner as f64 > config.beta_artificial * history.total as f64 {
        return RestartDecision::Restart(RestartKind::Artificial);
    }
    RestartDecision::Continue
}

/// Displacements at or below this are treated as no movement.
pub const ZERO_DISPLACEMENT: f64 = 1e-10;

/// Exponential smoothing of the primal weight towards `‖Δy‖/‖Δx‖`, the
/// ratio that balances `(w/η)‖Δx‖²` against `‖Δy‖²/(ηw)`. `dx_norm` and
/// `dy_norm` are the anchor displacements over the last outer loop; the
/// weight is kept when either side did not move.
pub fn smooth_primal_weight(w: f64, dx_norm: f64, dy_norm: f64, theta: f64) -> f64 {
    let d = dy_norm / dx_norm;
    if dx_norm > ZERO_DISPLACEMENT && dy_norm > ZERO_DISPLACEMENT && d.is_finite() {
        (theta * d.ln() + (1.0 - theta) * w.ln()).exp()
    } else {
        w
    }
}

// Per-component kernels. Single and batch paths call exactly these.

#[inline]
pub(crate) fn primal_component(x: f64, aty: f64, c: f64, tau: f64, lower: f64, upper: f64) -> f64 {
    clamp(x - tau * (c + aty), lower, upper)
}

#[inline]
pub(crate) fn dual_component(y: f64, a_ext: f64, sigma: f64, lower: f64, upper: f64) -> f64 {
    // σ(v − Π(v)) rather than y + σa − σΠ(v): the sign of each component is
    // then exact, so ỹ always lies in the barrier cone of the row box
    let v = y / sigma + a_ext;
    sigma * (v - clamp(v, lower, upper))
}

#[inline]
pub(crate) fn halpern_coefficients(k: usize) -> (f64, f64) {
    let k = k as f64;
    ((k + 1.0) / (k + 2.0), 1.0 / (k + 2.0))
}

#[inline]
pub(crate) fn halpern_component(t: f64, z: f64, anchor: f64, a: f64, b: f64) -> f64 {
    a * (2.0 * t - z) + b * anchor
}

/// Squared M-norm pieces accumulated in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MetricParts {
    pub dx_sq: f64,
    pub dy_sq: f64,
    pub cross: f64,
}

impl MetricParts {
    pub fn finish(&self, params: &StepParams) -> Result<f64> {
        let q = (params.w / params.eta) * self.dx_sq + (1.0 / (params.eta * params.w)) * self.dy_sq + 2.0 * self.cross;
        metric_sqrt(q)
    }
}

fn metric_sqrt(q: f64) -> Result<f64> {
    if q < -1e-12 {
        return Err(Error::NegativeMetric(q));
    }
    Ok(q.max(0.0).sqrt())
}

/// `‖(dx, dy)‖_M` given `A dx`.
pub fn m_norm(dx: &[f64], dy: &[f64], a_dx: &[f64], params: &StepParams) -> Result<f64> {
    let mut parts = MetricParts::default();
    for v in dx {
        parts.dx_sq += v * v;
    }
    for (v, a) in dy.iter().zip(a_dx) {
        parts.dy_sq += v * v;
        parts.cross += v * a;
    }
    parts.finish(params)
}

/// Infeasibility witness from the displacement probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `φ(δy) + φ(δr) < 0` with `Aᵀδy + δr ≈ 0`.
    Primal { delta_y: Vec<f64>, delta_r: Vec<f64> },
    /// Improving recession direction.
    Dual { delta_x: Vec<f64> },
}

/// Displacement vectors `(δx, δy, δr)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityProbe {
    pub delta_x: Vec<f64>,
    pub delta_y: Vec<f64>,
    pub delta_r: Vec<f64>,
}

/// Relative optimality measures of one primal-dual candidate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OptimalityMetrics {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub gap_tolerance: f64,
    pub primal_residual: f64,
    pub primal_tolerance: f64,
    pub dual_residual: f64,
    pub dual_tolerance: f64,
}

impl OptimalityMetrics {
    pub fn is_optimal(&self) -> bool {
        self.gap.is_finite()
            && self.gap <= self.gap_tolerance
            && self.primal_residual <= self.primal_tolerance
            && self.dual_residual <= self.dual_tolerance
    }

    pub fn dual_feasible(&self) -> bool {
        self.dual_objective.is_finite() && self.dual_residual <= self.dual_tolerance
    }
}

/// One LP column as seen by the checks.
pub(crate) struct ColumnView<'a> {
    pub c: &'a [f64],
    pub var: &'a Bounds,
    pub rows: &'a Bounds,
}

/// Reduced cost from the gradient `g = −c − Aᵀy`.
pub(crate) fn reduced_cost(g: &[f64], x: &[f64], var: &Bounds, mode: ReducedCostMode) -> Vec<f64> {
    g.iter()
        .enumerate()
        .map(|(i, &gi)| {
            let (lo, hi) = (var.lower[i], var.upper[i]);
            let r = barrier_component(gi, lo, hi);
            match mode {
                ReducedCostMode::Projection => r,
                ReducedCostMode::PrimalAware => {
                    let bound = if r > 0.0 { hi } else { lo };
                    if r != 0.0 && bound.is_finite() && (x[i] - bound).abs() > x[i].abs() {
                        0.0
                    } else {
                        r
                    }
                }
            }
        })
        .collect()
}

fn support(v: &[f64], b: &Bounds) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, &vi)| support_term(vi, b.lower[i], b.upper[i]))
        .sum()
}

/// Evaluates the stopping conditions at `(x, y)`; returns the metrics and
/// the reduced cost.
pub(crate) fn optimality(
    col: &ColumnView<'_>,
    x: &[f64],
    ax: &[f64],
    y: &[f64],
    aty: &[f64],
    config: &SolverConfig,
) -> (OptimalityMetrics, Vec<f64>) {
    let g: Vec<f64> = col.c.iter().zip(aty).map(|(c, a)| -c - a).collect();
    let r = reduced_cost(&g, x, col.var, config.reduced_cost);
    let primal_objective: f64 = col.c.iter().zip(x).map(|(c, x)| c * x).sum();
    let phi = support(&r, col.var) + support(y, col.rows);
    let dual_objective = -phi;
    let gap = (primal_objective + phi).abs();
    let eps = config.eps_opt;
    let gap_tolerance = eps * (1.0 + primal_objective.abs() + phi.abs());
    let primal_residual = ax
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let d = v - clamp(v, col.rows.lower[i], col.rows.upper[i]);
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let primal_tolerance = eps * (1.0 + norm2(ax));
    let dual_residual = col
        .c
        .iter()
        .zip(aty)
        .zip(&r)
        .map(|((c, a), r)| {
            let d = c + a + r;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let dual_tolerance = config.dual_tolerance() * (1.0 + norm2(col.c));
    (
        OptimalityMetrics {
            primal_objective,
            dual_objective,
            gap: if gap.is_nan() { f64::INFINITY } else { gap },
            gap_tolerance,
            primal_residual,
            primal_tolerance,
            dual_residual,
            dual_tolerance,
        },
        r,
    )
}

/// Inputs of the displacement probe for one column. `x, y` is the current
/// iterate with products `ax = A x`, `aty = Aᵀy`; `xt, yt` is its image
/// under `T` with `axt`, `atyt`; `dy` is `Π_B(ỹ − y)` and `atdy = Aᵀ dy`.
pub(crate) struct ProbeInputs<'a> {
    pub x: &'a [f64],
    pub ax: &'a [f64],
    pub aty: &'a [f64],
    pub xt: &'a [f64],
    pub axt: &'a [f64],
    pub atyt: &'a [f64],
    pub dy: &'a [f64],
    pub atdy: &'a [f64],
}

/// `Π_{B[l,u]}(ỹ − y)` written into `out`.
pub(crate) fn dual_displacement(y: &[f64], yt: &[f64], rows: &Bounds, out: &mut [f64]) {
    for i in 0..out.len() {
        out[i] = barrier_component(yt[i] - y[i], rows.lower[i], rows.upper[i]);
    }
}

pub(crate) fn probe_vectors(col: &ColumnView<'_>, p: &ProbeInputs<'_>, config: &SolverConfig) -> InfeasibilityProbe {
    let g: Vec<f64> = col.c.iter().zip(p.aty).map(|(c, a)| -c - a).collect();
    let gt: Vec<f64> = col.c.iter().zip(p.atyt).map(|(c, a)| -c - a).collect();
    let r = reduced_cost(&g, p.x, col.var, config.reduced_cost);
    let rt = reduced_cost(&gt, p.xt, col.var, config.reduced_cost);
    let delta_r = rt
        .iter()
        .zip(&r)
        .enumerate()
        .map(|(i, (a, b))| barrier_component(a - b, col.var.lower[i], col.var.upper[i]))
        .collect();
    InfeasibilityProbe {
        delta_x: p.xt.iter().zip(p.x).map(|(a, b)| a - b).collect(),
        delta_y: p.dy.to_vec(),
        delta_r,
    }
}

/// Tests the primal and dual infeasibility conditions on the probe.
pub(crate) fn infeasibility(col: &ColumnView<'_>, p: &ProbeInputs<'_>, config: &SolverConfig) -> Option<Certificate> {
    let eps = config.eps_infeas;
    let probe = probe_vectors(col, p, config);

    let phi = support(&probe.delta_y, col.rows) + support(&probe.delta_r, col.var);
    if phi < 0.0 {
        let res = p
            .atdy
            .iter()
            .zip(&probe.delta_r)
            .map(|(a, r)| (a + r) * (a + r))
            .sum::<f64>()
            .sqrt();
        if res <= eps * phi.abs() {
            return Some(Certificate::Primal {
                delta_y: probe.delta_y,
                delta_r: probe.delta_r,
            });
        }
    }

    let ctdx: f64 = col.c.iter().zip(&probe.delta_x).map(|(c, d)| c * d).sum();
    if ctdx < 0.0 {
        let bound = eps * ctdx.abs();
        let var_res = probe
            .delta_x
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let e = d - recession_component(d, col.var.lower[i], col.var.upper[i]);
                e * e
            })
            .sum::<f64>()
            .sqrt();
        if var_res <= bound {
            let row_res = p
                .axt
                .iter()
                .zip(p.ax)
                .enumerate()
                .map(|(i, (a, b))| {
                    let d = a - b;
                    let e = d - recession_component(d, col.rows.lower[i], col.rows.upper[i]);
                    e * e
                })
                .sum::<f64>()
                .sqrt();
            if row_res <= bound {
                return Some(Certificate::Dual { delta_x: probe.delta_x });
            }
        }
    }
    None
}

/// Per-problem solver output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    /// `cᵀx` of the returned primal point.
    pub objective: f64,
    /// `−φ(r) − φ(y)` of the returned dual point.
    pub dual_objective: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Reduced cost.
    pub r: Vec<f64>,
    pub iterations: usize,
    pub restarts: usize,
    pub restart_counts: RestartCounts,
    pub primal_weight: f64,
    /// Metrics from the last termination check.
    pub metrics: OptimalityMetrics,
    pub certificate: Option<Certificate>,
}

impl SolveResult {
    pub(crate) fn preset(status: Status, objective: f64) -> Self {
        SolveResult {
            status,
            objective,
            dual_objective: objective,
            x: Vec::new(),
            y: Vec::new(),
            r: Vec::new(),
            iterations: 0,
            restarts: 0,
            restart_counts: RestartCounts::default(),
            primal_weight: f64::NAN,
            metrics: OptimalityMetrics::default(),
            certificate: None,
        }
    }
}

/// One restart event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartEvent {
    pub iteration: usize,
    pub kind: RestartKind,
    /// `r(z^{n,0})` of the loop being closed.
    pub old_anchor_residual: f64,
    /// `r(z^{n+1,0})`.
    pub new_anchor_residual: f64,
}

/// Optional per-iteration record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Restart residual at every iteration (batch: the averaged one).
    pub residuals: Vec<f64>,
    /// Bitwise checksum of the iterate `(x, y)` after every Halpern step.
    pub checksums: Vec<u64>,
    pub restarts: Vec<RestartEvent>,
}

pub(crate) fn checksum(seed: u64, values: &[f64]) -> u64 {
    values.iter().fold(seed, |h, v| {
        (h ^ v.to_bits()).rotate_left(7).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    })
}
