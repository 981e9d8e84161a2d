//! Ground-truth LP solver for tiny instances by exhaustive vertex
//! enumeration.
//!
//! Candidate vertices are screened in f64 and every accepted vertex is
//! re-solved and re-checked in exact rational arithmetic, so the reported
//! status and objective never depend on rounding. Lineality directions are
//! removed by adding exact equality rows, which makes the feasible set
//! pointed. Unboundedness is decided by a second enumeration over the
//! recession cone intersected with the unit box.

pub mod exact;

use std::collections::HashSet;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::LpProblem;
use exact::{dot, q, qi, to_f64, DenseLu, Q};

/// Largest `n + m` accepted by [`oracle_solve`].
pub const MAX_ORACLE_SIZE: usize = 14;

const PIVOT_TOL: f64 = 1e-11;
const SCREEN_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ActiveConstraint {
    RowLower(usize),
    RowUpper(usize),
    VariableLower(usize),
    VariableUpper(usize),
    /// Equality removing the k-th lineality direction.
    Lineality(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub status: OracleStatus,
    /// `+∞` when infeasible, `−∞` when unbounded.
    pub objective: f64,
    pub objective_exact: Option<Q>,
    /// Lexicographically smallest optimal vertex.
    pub vertex: Option<Vec<f64>>,
    pub vertex_exact: Option<Vec<Q>>,
    pub active_set: Vec<ActiveConstraint>,
    /// Recession direction with negative cost when unbounded.
    pub ray: Option<Vec<f64>>,
}

/// A verified vertex of the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub x: Vec<Q>,
    pub active: Vec<ActiveConstraint>,
}

impl Vertex {
    pub fn to_f64(&self) -> Vec<f64> {
        self.x.iter().map(to_f64).collect()
    }
}

#[derive(Clone)]
struct Side {
    tag: ActiveConstraint,
    value: Q,
    value_f: f64,
}

#[derive(Clone)]
struct Constraint {
    normal: Vec<Q>,
    normal_f: Vec<f64>,
    lower: Option<Q>,
    upper: Option<Q>,
    lower_f: f64,
    upper_f: f64,
    sides: Vec<Side>,
    tags: (ActiveConstraint, ActiveConstraint),
    always: bool,
}

impl Constraint {
    fn new(normal: Vec<Q>, lower: f64, upper: f64, tags: (ActiveConstraint, ActiveConstraint)) -> Self {
        let lo = lower.is_finite().then(|| q(lower));
        let up = upper.is_finite().then(|| q(upper));
        Self::exact(normal, lo, up, tags, false)
    }

    fn exact(normal: Vec<Q>, lower: Option<Q>, upper: Option<Q>, tags: (ActiveConstraint, ActiveConstraint), always: bool) -> Self {
        let mut sides = Vec::new();
        if let Some(l) = &lower {
            sides.push(Side { tag: tags.0, value: l.clone(), value_f: to_f64(l) });
        }
        if let Some(u) = &upper {
            if lower.as_ref() != Some(u) {
                sides.push(Side { tag: tags.1, value: u.clone(), value_f: to_f64(u) });
            }
        }
        Constraint {
            normal_f: normal.iter().map(to_f64).collect(),
            normal,
            lower_f: lower.as_ref().map_or(f64::NEG_INFINITY, to_f64),
            upper_f: upper.as_ref().map_or(f64::INFINITY, to_f64),
            lower,
            upper,
            sides,
            tags,
            always,
        }
    }

    fn screen(&self, x: &[f64]) -> bool {
        let v: f64 = self.normal_f.iter().zip(x).map(|(a, b)| a * b).sum();
        v >= self.lower_f - SCREEN_TOL * (1.0 + self.lower_f.abs()) && v <= self.upper_f + SCREEN_TOL * (1.0 + self.upper_f.abs())
    }

    fn contains(&self, x: &[Q]) -> bool {
        let v = dot(&self.normal, x);
        self.lower.as_ref().is_none_or(|l| &v >= l) && self.upper.as_ref().is_none_or(|u| &v <= u)
    }
}

fn constraints_of(p: &LpProblem) -> Vec<Constraint> {
    let n = p.n_cols();
    let mut out = Vec::with_capacity(n + p.n_rows());
    for i in 0..p.n_rows() {
        let mut normal = vec![Q::zero(); n];
        let (cols, vals) = p.a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            normal[j as usize] = q(v);
        }
        let tags = (ActiveConstraint::RowLower(i), ActiveConstraint::RowUpper(i));
        out.push(Constraint::new(normal, p.row_bounds.lower[i], p.row_bounds.upper[i], tags));
    }
    for j in 0..n {
        let mut normal = vec![Q::zero(); n];
        normal[j] = qi(1);
        let tags = (ActiveConstraint::VariableLower(j), ActiveConstraint::VariableUpper(j));
        out.push(Constraint::new(normal, p.var_bounds.lower[j], p.var_bounds.upper[j], tags));
    }
    out
}

/// Adds equality rows for a basis of the lineality space; returns the basis.
fn remove_lineality(n: usize, cons: &mut Vec<Constraint>) -> Vec<Vec<Q>> {
    let normals: Vec<Vec<Q>> = cons.iter().filter(|c| !c.sides.is_empty()).map(|c| c.normal.clone()).collect();
    let basis = exact::nullspace(&normals, n);
    for (k, d) in basis.iter().enumerate() {
        let tag = ActiveConstraint::Lineality(k);
        cons.push(Constraint::exact(d.clone(), Some(Q::zero()), Some(Q::zero()), (tag, tag), true));
    }
    basis
}

/// Calls `f` for every k-subset of `0..len`, in lexicographic order.
fn for_each_subset(len: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > len {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + len - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Enumerates feasible vertices. With `prune = Some(c)`, only vertices whose
/// screened cost is within tolerance of the best seen so far are verified,
/// which keeps every minimizer of `c` in the output.
fn enumerate(n: usize, cons: &[Constraint], prune: Option<&[f64]>) -> Vec<Vertex> {
    let always: Vec<usize> = (0..cons.len()).filter(|&i| cons[i].always).collect();
    let candidates: Vec<usize> = (0..cons.len()).filter(|&i| !cons[i].always && !cons[i].sides.is_empty()).collect();
    let mut out = Vec::new();
    if always.len() > n {
        // more independent equalities than dimensions cannot happen for a nullspace basis
        return out;
    }
    let k = n - always.len();
    let mut seen: HashSet<Vec<Q>> = HashSet::new();
    let mut best = f64::INFINITY;
    for_each_subset(candidates.len(), k, |subset| {
        let chosen: Vec<usize> = always.iter().copied().chain(subset.iter().map(|&s| candidates[s])).collect();
        let m: Vec<Vec<f64>> = chosen.iter().map(|&i| cons[i].normal_f.clone()).collect();
        let Some(lu) = DenseLu::factor(m, PIVOT_TOL) else {
            return;
        };
        let mut choice = vec![0usize; chosen.len()];
        loop {
            let rhs: Vec<f64> = chosen.iter().zip(&choice).map(|(&i, &s)| cons[i].sides[s].value_f).collect();
            let x = lu.solve(&rhs);
            if x.iter().all(|v| v.is_finite()) && cons.iter().all(|c| c.screen(&x)) {
                let cost = prune.map(|c| c.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>());
                let keep = cost.is_none_or(|v| v <= best + SCREEN_TOL * (1.0 + best.abs()));
                if keep {
                    let before = out.len();
                    verify(cons, &chosen, &choice, &mut seen, &mut out);
                    if out.len() > before {
                        if let Some(v) = cost {
                            best = best.min(v);
                        }
                    }
                }
            }
            // advance the side choice like an odometer
            let mut pos = 0;
            loop {
                if pos == chosen.len() {
                    return;
                }
                choice[pos] += 1;
                if choice[pos] < cons[chosen[pos]].sides.len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    });
    out
}

fn verify(cons: &[Constraint], chosen: &[usize], choice: &[usize], seen: &mut HashSet<Vec<Q>>, out: &mut Vec<Vertex>) {
    let m: Vec<Vec<Q>> = chosen.iter().map(|&i| cons[i].normal.clone()).collect();
    let rhs: Vec<Q> = chosen.iter().zip(choice).map(|(&i, &s)| cons[i].sides[s].value.clone()).collect();
    let Some(x) = exact::solve(m, rhs) else {
        return;
    };
    if !cons.iter().all(|c| c.contains(&x)) || !seen.insert(x.clone()) {
        return;
    }
    let mut active: Vec<ActiveConstraint> = chosen.iter().zip(choice).map(|(&i, &s)| cons[i].sides[s].tag).collect();
    active.sort();
    out.push(Vertex { x, active });
}

/// Exact minimizer among `vertices`, ties broken by the lexicographically
/// smallest vertex.
fn best_vertex<'v>(c: &[Q], vertices: &'v [Vertex]) -> Option<(Q, &'v Vertex)> {
    let mut best: Option<(Q, &Vertex)> = None;
    for v in vertices {
        let obj = dot(c, &v.x);
        let better = match &best {
            None => true,
            Some((b, bv)) => obj < *b || (obj == *b && v.x < bv.x),
        };
        if better {
            best = Some((obj, v));
        }
    }
    best
}

/// All feasible vertices of the (lineality-reduced) feasible set.
pub fn enumerate_vertices(problem: &LpProblem) -> Result<Vec<Vertex>> {
    check_size(problem)?;
    let n = problem.n_cols();
    let mut cons = constraints_of(problem);
    remove_lineality(n, &mut cons);
    Ok(enumerate(n, &cons, None))
}

fn check_size(p: &LpProblem) -> Result<()> {
    if p.n_cols() + p.n_rows() > MAX_ORACLE_SIZE {
        return Err(Error::OracleTooLarge(p.n_cols(), p.n_rows()));
    }
    Ok(())
}

pub fn oracle_solve(problem: &LpProblem) -> Result<OracleResult> {
    check_size(problem)?;
    let n = problem.n_cols();
    let c: Vec<Q> = problem.c.iter().map(|&v| q(v)).collect();
    let mut cons = constraints_of(problem);
    let lineality = remove_lineality(n, &mut cons);
    let vertices = enumerate(n, &cons, Some(&problem.c));
    if vertices.is_empty() {
        return Ok(OracleResult {
            status: OracleStatus::Infeasible,
            objective: f64::INFINITY,
            objective_exact: None,
            vertex: None,
            vertex_exact: None,
            active_set: Vec::new(),
            ray: None,
        });
    }
    if let Some(ray) = unbounded_direction(problem, &cons, &c, &lineality) {
        return Ok(OracleResult {
            status: OracleStatus::Unbounded,
            objective: f64::NEG_INFINITY,
            objective_exact: None,
            vertex: None,
            vertex_exact: None,
            active_set: Vec::new(),
            ray: Some(ray.iter().map(to_f64).collect()),
        });
    }
    let (obj, v) = best_vertex(&c, &vertices).expect("vertex list is non-empty");
    Ok(OracleResult {
        status: OracleStatus::Optimal,
        objective: to_f64(&obj),
        objective_exact: Some(obj),
        vertex: Some(v.to_f64()),
        vertex_exact: Some(v.x.clone()),
        active_set: v.active.clone(),
        ray: None,
    })
}

/// A recession direction with negative cost, if one exists.
fn unbounded_direction(problem: &LpProblem, cons: &[Constraint], c: &[Q], lineality: &[Vec<Q>]) -> Option<Vec<Q>> {
    for d in lineality {
        let cd = dot(c, d);
        if !cd.is_zero() {
            return Some(if cd.is_positive() { d.iter().map(|v| -v).collect() } else { d.clone() });
        }
    }
    let n = problem.n_cols();
    let mut rec = Vec::with_capacity(cons.len());
    for con in cons {
        // variable rows also carry the unit box that makes the cone a polytope
        let is_var = matches!(con.tags.0, ActiveConstraint::VariableLower(_));
        let zero_or = |bound: &Option<Q>, unit: i64| match bound {
            Some(_) => Some(Q::zero()),
            None if is_var => Some(qi(unit)),
            None => None,
        };
        let lower = zero_or(&con.lower, -1);
        let upper = zero_or(&con.upper, 1);
        rec.push(Constraint::exact(con.normal.clone(), lower, upper, con.tags, con.always));
    }
    let cf: Vec<f64> = c.iter().map(to_f64).collect();
    let dirs = enumerate(n, &rec, Some(&cf));
    let (obj, v) = best_vertex(c, &dirs)?;
    obj.is_negative().then(|| v.x.clone())
}
