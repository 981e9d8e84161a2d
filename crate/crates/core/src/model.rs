//! LP data model and the implicit batch representation.
//!
//! A [`BatchProblem`] never stores the `n x N` objective or bound matrices.
//! Each column is the base problem plus a short list of single-entry
//! overrides, or a signed unit objective for bound tightening batches.

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{Bounds, Interval};
use crate::error::{Error, Result};
use crate::pdhg::Status;
use crate::sparse::SparseMatrix;

/// `min cᵀx  s.t.  l ≤ Ax ≤ u,  x̲ ≤ x ≤ x̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub a: SparseMatrix,
    pub c: Vec<f64>,
    pub row_bounds: Bounds,
    pub var_bounds: Bounds,
}

impl LpProblem {
    /// Checks dimensions only; bound and objective sanity is reported by
    /// [`validate`].
    pub fn new(a: SparseMatrix, c: Vec<f64>, row_bounds: Bounds, var_bounds: Bounds) -> Result<Self> {
        let p = LpProblem {
            a,
            c,
            row_bounds,
            var_bounds,
        };
        if let Some(msg) = p.dimension_error() {
            return Err(Error::DimensionMismatch(msg));
        }
        Ok(p)
    }

    pub fn n_rows(&self) -> usize {
        self.a.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.a.n_cols()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    fn dimension_error(&self) -> Option<String> {
        let (m, n) = (self.a.n_rows(), self.a.n_cols());
        if self.c.len() != n {
            return Some(format!("objective has {} entries, A has {n} columns", self.c.len()));
        }
        if self.var_bounds.lower.len() != n || self.var_bounds.upper.len() != n {
            return Some(format!("variable bounds do not match {n} columns"));
        }
        if self.row_bounds.lower.len() != m || self.row_bounds.upper.len() != m {
            return Some(format!("row bounds do not match {m} rows"));
        }
        None
    }

    /// Copy with the row `cᵀx ≤ alpha` appended.
    pub fn with_cutoff(&self, alpha: f64) -> Result<LpProblem> {
        let row: Vec<(usize, f64)> = self.c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect();
        let a = self.a.with_appended_row(&row)?;
        let mut rb = self.row_bounds.clone();
        rb.lower.push(f64::NEG_INFINITY);
        rb.upper.push(alpha);
        LpProblem::new(a, self.c.clone(), rb, self.var_bounds.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    DimensionMismatch,
    InvertedRowInterval { row: usize },
    InvertedVariableInterval { variable: usize },
    NonFiniteObjective { variable: usize },
    EmptyRow { row: usize },
    EmptyColumn { variable: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub items: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter().filter(|d| d.severity == Severity::Warning)
    }

    fn push(&mut self, severity: Severity, kind: DiagnosticKind, message: String) {
        self.items.push(Diagnostic { severity, kind, message });
    }
}

/// Structured report of problems with `p`. Never fails.
pub fn validate(p: &LpProblem) -> Diagnostics {
    let mut d = Diagnostics::default();
    if let Some(msg) = p.dimension_error() {
        d.push(Severity::Error, DiagnosticKind::DimensionMismatch, msg);
        return d;
    }
    for (i, iv) in p.row_bounds.iter().enumerate() {
        if !iv.is_valid() {
            d.push(
                Severity::Error,
                DiagnosticKind::InvertedRowInterval { row: i },
                format!("inverted interval, row {i}: [{}, {}]", iv.lower, iv.upper),
            );
        }
    }
    for (j, iv) in p.var_bounds.iter().enumerate() {
        if !iv.is_valid() {
            d.push(
                Severity::Error,
                DiagnosticKind::InvertedVariableInterval { variable: j },
                format!("inverted interval, variable {j}: [{}, {}]", iv.lower, iv.upper),
            );
        }
    }
    for (j, &c) in p.c.iter().enumerate() {
        if !c.is_finite() {
            d.push(
                Severity::Error,
                DiagnosticKind::NonFiniteObjective { variable: j },
                format!("non-finite objective coefficient {c} on variable {j}"),
            );
        }
    }
    for i in 0..p.n_rows() {
        if p.a.row(i).0.is_empty() {
            d.push(Severity::Warning, DiagnosticKind::EmptyRow { row: i }, format!("row {i} has no nonzeros"));
        }
    }
    for j in 0..p.n_cols() {
        if p.a.column(j).0.is_empty() {
            d.push(
                Severity::Warning,
                DiagnosticKind::EmptyColumn { variable: j },
                format!("variable {j} appears in no row"),
            );
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverrideKind {
    /// Replaces `c_i` for this column.
    Objective,
    VariableLower,
    VariableUpper,
}

/// One entry of one column that differs from the base problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnOverride {
    pub column: usize,
    pub kind: OverrideKind,
    pub variable: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveMode {
    /// Every column minimizes the base `c`.
    Shared,
    /// `C = [I  -I]`: column `j < n` minimizes `x_j`, column `n + j` minimizes `-x_j`.
    SignedUnit,
}

/// Columns decided before solving (e.g. a branch whose bound crosses the
/// base interval, or a fixed variable in a tightening batch).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetOutcome {
    pub status: Status,
    pub objective: f64,
}

/// Upper limit on overrides attached to a single column.
pub const MAX_OVERRIDES_PER_COLUMN: usize = 8;

/// `N` problems sharing `A`, stored implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchProblem {
    base: LpProblem,
    width: usize,
    objective_mode: ObjectiveMode,
    overrides: Vec<ColumnOverride>,
    column_start: Vec<usize>,
    presets: Vec<Option<PresetOutcome>>,
    cutoff: Option<f64>,
    original_rows: usize,
}

impl BatchProblem {
    pub fn new(
        base: LpProblem,
        width: usize,
        objective_mode: ObjectiveMode,
        mut overrides: Vec<ColumnOverride>,
        cutoff: Option<f64>,
    ) -> Result<Self> {
        let n = base.n_cols();
        if objective_mode == ObjectiveMode::SignedUnit && width != 2 * n {
            return Err(Error::InvalidBatch(format!(
                "signed unit objectives need width 2n = {}, got {width}",
                2 * n
            )));
        }
        overrides.sort_by_key(|o| (o.column, o.variable, o.kind as u8));
        let mut column_start = vec![0usize; width + 1];
        for o in &overrides {
            if o.column >= width {
                return Err(Error::ColumnOutOfRange {
                    index: o.column,
                    width,
                });
            }
            if o.variable >= n {
                return Err(Error::InvalidBatch(format!(
                    "override on column {} references variable {} of {n}",
                    o.column, o.variable
                )));
            }
            if !o.value.is_finite() && o.kind == OverrideKind::Objective {
                return Err(Error::InvalidBatch(format!("non-finite objective override on column {}", o.column)));
            }
            column_start[o.column + 1] += 1;
        }
        for j in 0..width {
            if column_start[j + 1] > MAX_OVERRIDES_PER_COLUMN {
                return Err(Error::InvalidBatch(format!(
                    "column {j} carries {} overrides (limit {MAX_OVERRIDES_PER_COLUMN})",
                    column_start[j + 1]
                )));
            }
            column_start[j + 1] += column_start[j];
        }
        let original_rows = base.n_rows();
        let base = match cutoff {
            Some(alpha) => base.with_cutoff(alpha)?,
            None => base,
        };
        let batch = BatchProblem {
            base,
            width,
            objective_mode,
            overrides,
            column_start,
            presets: vec![None; width],
            cutoff,
            original_rows,
        };
        for j in 0..width {
            let col = batch.resolve_column(j)?;
            for o in col.overrides {
                let iv = Interval::new(col.var_lower(o.variable), col.var_upper(o.variable));
                if !iv.is_valid() {
                    return Err(Error::InvalidBatch(format!(
                        "column {j}: override leaves variable {} with invalid interval [{}, {}]",
                        o.variable, iv.lower, iv.upper
                    )));
                }
            }
        }
        Ok(batch)
    }

    /// `width` identical copies of `base`.
    pub fn replicate(base: LpProblem, width: usize) -> Result<Self> {
        BatchProblem::new(base, width, ObjectiveMode::Shared, Vec::new(), None)
    }

    pub fn set_preset(&mut self, column: usize, outcome: PresetOutcome) -> Result<()> {
        if column >= self.width {
            return Err(Error::ColumnOutOfRange {
                index: column,
                width: self.width,
            });
        }
        self.presets[column] = Some(outcome);
        Ok(())
    }

    pub fn preset(&self, column: usize) -> Option<PresetOutcome> {
        self.presets[column]
    }

    /// The shared problem, including the cutoff row when one was requested.
    pub fn base(&self) -> &LpProblem {
        &self.base
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn objective_mode(&self) -> ObjectiveMode {
        self.objective_mode
    }

    pub fn overrides(&self) -> &[ColumnOverride] {
        &self.overrides
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// Row count before any cutoff row was appended.
    pub fn original_rows(&self) -> usize {
        self.original_rows
    }

    /// Effective data of column `j` as an accessor over the base vectors.
    pub fn resolve_column(&self, j: usize) -> Result<ResolvedColumn<'_>> {
        if j >= self.width {
            return Err(Error::ColumnOutOfRange {
                index: j,
                width: self.width,
            });
        }
        let n = self.base.n_cols();
        let objective = match self.objective_mode {
            ObjectiveMode::Shared => BaseObjective::Shared(&self.base.c),
            ObjectiveMode::SignedUnit if j < n => BaseObjective::Unit { index: j, sign: 1.0 },
            ObjectiveMode::SignedUnit => BaseObjective::Unit {
                index: j - n,
                sign: -1.0,
            },
        };
        Ok(ResolvedColumn {
            n,
            objective,
            var_bounds: &self.base.var_bounds,
            row_bounds: &self.base.row_bounds,
            overrides: &self.overrides[self.column_start[j]..self.column_start[j + 1]],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseObjective<'a> {
    Shared(&'a [f64]),
    Unit { index: usize, sign: f64 },
}

/// Column `j` of a batch: base vectors plus that column's overrides.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedColumn<'a> {
    n: usize,
    pub objective: BaseObjective<'a>,
    pub var_bounds: &'a Bounds,
    pub row_bounds: &'a Bounds,
    pub overrides: &'a [ColumnOverride],
}

impl<'a> ResolvedColumn<'a> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn base_objective(&self, i: usize) -> f64 {
        match self.objective {
            BaseObjective::Shared(c) => c[i],
            BaseObjective::Unit { index, sign } => {
                if i == index {
                    sign
                } else {
                    0.0
                }
            }
        }
    }

    fn find(&self, i: usize, kind: OverrideKind) -> Option<f64> {
        self.overrides
            .iter()
            .rev()
            .find(|o| o.variable == i && o.kind == kind)
            .map(|o| o.value)
    }

    pub fn objective(&self, i: usize) -> f64 {
        self.find(i, OverrideKind::Objective).unwrap_or_else(|| self.base_objective(i))
    }

    pub fn var_lower(&self, i: usize) -> f64 {
        self.find(i, OverrideKind::VariableLower)
            .unwrap_or(self.var_bounds.lower[i])
    }

    pub fn var_upper(&self, i: usize) -> f64 {
        self.find(i, OverrideKind::VariableUpper)
            .unwrap_or(self.var_bounds.upper[i])
    }

    /// Variables whose data differs from the base vectors.
    pub fn patched_variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.overrides.iter().map(|o| o.variable)
    }

    pub fn objective_vector(&self) -> Cow<'a, [f64]> {
        match (self.objective, self.overrides.iter().any(|o| o.kind == OverrideKind::Objective)) {
            (BaseObjective::Shared(c), false) => Cow::Borrowed(c),
            _ => Cow::Owned((0..self.n).map(|i| self.objective(i)).collect()),
        }
    }

    pub fn var_bounds_resolved(&self) -> Cow<'a, Bounds> {
        if self.overrides.iter().all(|o| o.kind == OverrideKind::Objective) {
            return Cow::Borrowed(self.var_bounds);
        }
        let mut b = self.var_bounds.clone();
        for o in self.overrides {
            match o.kind {
                OverrideKind::VariableLower => b.lower[o.variable] = o.value,
                OverrideKind::VariableUpper => b.upper[o.variable] = o.value,
                OverrideKind::Objective => {}
            }
        }
        Cow::Owned(b)
    }

    /// This column as a standalone problem over the shared matrix.
    pub fn to_problem(&self, a: &SparseMatrix) -> LpProblem {
        LpProblem {
            a: a.clone(),
            c: self.objective_vector().into_owned(),
            row_bounds: self.row_bounds.clone(),
            var_bounds: self.var_bounds_resolved().into_owned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn small() -> LpProblem {
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0, 0.0]], 4).unwrap();
        LpProblem::new(
            a,
            vec![1.0, -1.0, 2.0, 0.5],
            Bounds::from_intervals(&[Interval::new(-INF, 4.0), Interval::new(1.0, 3.0)]),
            Bounds::uniform(4, Interval::new(0.0, 5.0)),
        )
        .unwrap()
    }

    #[test]
    fn well_formed_has_no_diagnostics() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 4.0]], 2).unwrap();
        let p = LpProblem::new(
            a,
            vec![1.0, 1.0],
            Bounds::uniform(2, Interval::new(0.0, 1.0)),
            Bounds::uniform(2, Interval::new(0.0, INF)),
        )
        .unwrap();
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn inverted_row_interval_is_error() {
        let mut p = small();
        p.row_bounds.set(0, Interval::new(3.0, 1.0));
        let d = validate(&p);
        assert!(d.has_errors());
        let e = d.errors().next().unwrap();
        assert_eq!(e.kind, DiagnosticKind::InvertedRowInterval { row: 0 });
        assert!(e.message.contains("inverted interval, row 0"));
    }

    #[test]
    fn empty_column_is_warning() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0]], 2).unwrap();
        let p = LpProblem::new(
            a,
            vec![1.0, 1.0],
            Bounds::uniform(1, Interval::new(0.0, 1.0)),
            Bounds::uniform(2, Interval::new(0.0, 1.0)),
        )
        .unwrap();
        let d = validate(&p);
        assert!(!d.has_errors());
        assert_eq!(d.warnings().count(), 1);
        assert_eq!(d.items[0].kind, DiagnosticKind::EmptyColumn { variable: 1 });
    }

    #[test]
    fn non_finite_objective_and_dimension_mismatch() {
        let mut p = small();
        p.c[2] = f64::NAN;
        assert_eq!(
            validate(&p).errors().next().unwrap().kind,
            DiagnosticKind::NonFiniteObjective { variable: 2 }
        );
        p.c.pop();
        assert_eq!(validate(&p).items[0].kind, DiagnosticKind::DimensionMismatch);
        assert!(LpProblem::new(p.a.clone(), p.c.clone(), p.row_bounds.clone(), p.var_bounds.clone()).is_err());
    }

    #[test]
    fn fsb_style_override_resolves() {
        let ov = ColumnOverride {
            column: 0,
            kind: OverrideKind::VariableLower,
            variable: 3,
            value: 1.0,
        };
        let b = BatchProblem::new(small(), 2, ObjectiveMode::Shared, vec![ov], None).unwrap();
        let col = b.resolve_column(0).unwrap();
        for i in 0..4 {
            let expected = if i == 3 { 1.0 } else { 0.0 };
            assert_eq!(col.var_lower(i), expected);
            assert_eq!(col.var_upper(i), 5.0);
        }
        let untouched = b.resolve_column(1).unwrap();
        assert_eq!(untouched.var_bounds_resolved().as_ref(), &small().var_bounds);
        assert_eq!(untouched.objective_vector().as_ref(), &small().c[..]);
        assert!(matches!(untouched.objective_vector(), Cow::Borrowed(_)));
    }

    #[test]
    fn signed_unit_indexing() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0, 1.0]], 3).unwrap();
        let p = LpProblem::new(
            a,
            vec![0.0; 3],
            Bounds::uniform(1, Interval::new(-INF, 1.0)),
            Bounds::uniform(3, Interval::new(0.0, 1.0)),
        )
        .unwrap();
        let b = BatchProblem::new(p, 6, ObjectiveMode::SignedUnit, vec![], None).unwrap();
        let c4 = b.resolve_column(4).unwrap().objective_vector().into_owned();
        assert_eq!(c4, vec![0.0, -1.0, 0.0]);
        assert!(matches!(b.resolve_column(6), Err(Error::ColumnOutOfRange { index: 6, width: 6 })));
    }

    #[test]
    fn signed_unit_requires_double_width() {
        assert!(BatchProblem::new(small(), 5, ObjectiveMode::SignedUnit, vec![], None).is_err());
    }

    #[test]
    fn override_must_leave_valid_interval() {
        let ov = ColumnOverride {
            column: 0,
            kind: OverrideKind::VariableLower,
            variable: 0,
            value: 6.0,
        };
        assert!(BatchProblem::new(small(), 1, ObjectiveMode::Shared, vec![ov], None).is_err());
    }

    #[test]
    fn too_many_overrides() {
        let ovs: Vec<_> = (0..MAX_OVERRIDES_PER_COLUMN + 1)
            .map(|k| ColumnOverride {
                column: 0,
                kind: OverrideKind::Objective,
                variable: k % 4,
                value: k as f64,
            })
            .collect();
        assert!(BatchProblem::new(small(), 1, ObjectiveMode::Shared, ovs, None).is_err());
    }

    #[test]
    fn cutoff_appends_row() {
        let b = BatchProblem::new(small(), 1, ObjectiveMode::Shared, vec![], Some(7.0)).unwrap();
        assert_eq!(b.base().n_rows(), 3);
        assert_eq!(b.original_rows(), 2);
        assert_eq!(b.base().row_bounds.get(2), Interval::new(-INF, 7.0));
        let (idx, val) = b.base().a.row(2);
        assert_eq!(idx, &[0, 1, 2, 3]);
        assert_eq!(val, &[1.0, -1.0, 2.0, 0.5]);
    }

    #[test]
    fn materialized_columns_match_explicit_matrices() {
        // brute-force materialization: build C, X̲, X̄ densely and compare
        let p = small();
        let n = p.n_cols();
        let width = 5;
        let ovs = vec![
            ColumnOverride { column: 0, kind: OverrideKind::VariableLower, variable: 1, value: 2.0 },
            ColumnOverride { column: 2, kind: OverrideKind::VariableUpper, variable: 3, value: 1.0 },
            ColumnOverride { column: 2, kind: OverrideKind::Objective, variable: 0, value: -4.0 },
            ColumnOverride { column: 4, kind: OverrideKind::VariableUpper, variable: 0, value: 0.0 },
        ];
        let b = BatchProblem::new(p.clone(), width, ObjectiveMode::Shared, ovs.clone(), None).unwrap();
        let mut c_mat = vec![p.c.clone(); width];
        let mut lo_mat = vec![p.var_bounds.lower.clone(); width];
        let mut hi_mat = vec![p.var_bounds.upper.clone(); width];
        for o in &ovs {
            match o.kind {
                OverrideKind::Objective => c_mat[o.column][o.variable] = o.value,
                OverrideKind::VariableLower => lo_mat[o.column][o.variable] = o.value,
                OverrideKind::VariableUpper => hi_mat[o.column][o.variable] = o.value,
            }
        }
        for j in 0..width {
            let col = b.resolve_column(j).unwrap();
            assert_eq!(col.objective_vector().as_ref(), &c_mat[j][..]);
            let vb = col.var_bounds_resolved();
            assert_eq!(vb.lower, lo_mat[j]);
            assert_eq!(vb.upper, hi_mat[j]);
            for i in 0..n {
                assert_eq!(col.objective(i), c_mat[j][i]);
                assert_eq!(col.var_lower(i), lo_mat[j][i]);
                assert_eq!(col.var_upper(i), hi_mat[j][i]);
            }
        }
    }
}
