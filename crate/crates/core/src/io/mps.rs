//! Free-format MPS.
//!
//! The first `N` row is the objective; later `N` rows are kept as free
//! constraints so that writing and re-reading preserves the row count.
//! Integrality markers are recorded but do not change the LP.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::bounds::{Bounds, Interval};
use crate::error::{Error, Result};
use crate::model::LpProblem;
use crate::sparse::SparseMatrix;

const INF: f64 = f64::INFINITY;

/// An LP read from MPS together with its names and integrality markers.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsModel {
    pub name: String,
    pub objective_name: String,
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub problem: LpProblem,
    /// Columns inside `INTORG`/`INTEND` markers, ascending.
    pub integer: Vec<usize>,
    /// Constant term: minus the objective row's right-hand side.
    pub objective_offset: f64,
}

impl MpsModel {
    /// Default names `R<i>`, `C<j>`.
    pub fn from_problem(name: &str, problem: LpProblem, integer: Vec<usize>) -> Self {
        MpsModel {
            name: name.to_string(),
            objective_name: "OBJ".to_string(),
            row_names: (0..problem.n_rows()).map(|i| format!("R{i}")).collect(),
            col_names: (0..problem.n_cols()).map(|j| format!("C{j}")).collect(),
            problem,
            integer,
            objective_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowType {
    N,
    L,
    G,
    E,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Mps {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| err(line, format!("invalid number '{tok}'")))?;
    if v.is_nan() {
        return Err(err(line, "NaN value"));
    }
    // conventional infinity for MPS data
    Ok(if v >= 1e30 {
        INF
    } else if v <= -1e30 {
        -INF
    } else {
        v
    })
}

/// Name/value pairs following an optional set name.
fn pairs<'t>(toks: &[&'t str], line: usize) -> Result<Vec<(&'t str, f64)>> {
    let toks = if toks.len() % 2 == 1 { &toks[1..] } else { toks };
    if toks.is_empty() {
        return Err(err(line, "expected name/value pairs"));
    }
    toks.chunks(2).map(|c| Ok((c[0], number(c[1], line)?))).collect()
}

struct Parser {
    name: String,
    maximize: bool,
    objective: Option<String>,
    rows: Vec<(String, RowType)>,
    row_index: HashMap<String, usize>,
    cols: Vec<String>,
    col_index: HashMap<String, usize>,
    c: Vec<f64>,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    range: Vec<Option<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer: Vec<bool>,
    in_integer: bool,
    objective_offset: f64,
}

enum RowRef {
    Objective,
    Row(usize),
}

impl Parser {
    fn row(&self, name: &str, line: usize) -> Result<RowRef> {
        if self.objective.as_deref() == Some(name) {
            return Ok(RowRef::Objective);
        }
        match self.row_index.get(name) {
            Some(&i) => Ok(RowRef::Row(i)),
            None => Err(err(line, format!("unknown row '{name}'"))),
        }
    }

    fn column(&self, name: &str, line: usize) -> Result<usize> {
        self.col_index
            .get(name)
            .copied()
            .ok_or_else(|| err(line, format!("bound on undeclared column '{name}'")))
    }

    fn add_row(&mut self, kind: &str, name: &str, line: usize) -> Result<()> {
        let t = match kind.to_ascii_uppercase().as_str() {
            "N" => RowType::N,
            "L" => RowType::L,
            "G" => RowType::G,
            "E" => RowType::E,
            other => return Err(err(line, format!("unknown row type '{other}'"))),
        };
        if self.row_index.contains_key(name) || self.objective.as_deref() == Some(name) {
            return Err(err(line, format!("duplicate row name '{name}'")));
        }
        if t == RowType::N && self.objective.is_none() {
            self.objective = Some(name.to_string());
            return Ok(());
        }
        self.row_index.insert(name.to_string(), self.rows.len());
        self.rows.push((name.to_string(), t));
        Ok(())
    }

    fn column_line(&mut self, toks: &[&str], line: usize) -> Result<()> {
        if toks.len() >= 3 && toks[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
            match toks[2].trim_matches('\'').to_ascii_uppercase().as_str() {
                "INTORG" => self.in_integer = true,
                "INTEND" => self.in_integer = false,
                other => return Err(err(line, format!("unknown marker '{other}'"))),
            }
            return Ok(());
        }
        if toks.len() != 3 && toks.len() != 5 {
            return Err(err(line, "COLUMNS line needs a column and one or two row/value pairs"));
        }
        let name = toks[0];
        let j = match self.col_index.get(name) {
            Some(&j) => j,
            None => {
                let j = self.cols.len();
                self.col_index.insert(name.to_string(), j);
                self.cols.push(name.to_string());
                self.c.push(0.0);
                self.lower.push(0.0);
                self.upper.push(INF);
                self.integer.push(self.in_integer);
                j
            }
        };
        for (row, v) in pairs(&toks[1..], line)? {
            if !v.is_finite() {
                return Err(err(line, format!("infinite coefficient in column '{name}'")));
            }
            match self.row(row, line)? {
                RowRef::Objective => self.c[j] += v,
                RowRef::Row(i) => self.triplets.push((i, j, v)),
            }
        }
        Ok(())
    }

    fn rhs_line(&mut self, toks: &[&str], line: usize) -> Result<()> {
        for (row, v) in pairs(toks, line)? {
            match self.row(row, line)? {
                RowRef::Objective => self.objective_offset = -v,
                RowRef::Row(i) => self.rhs[i] = v,
            }
        }
        Ok(())
    }

    fn range_line(&mut self, toks: &[&str], line: usize) -> Result<()> {
        for (row, v) in pairs(toks, line)? {
            match self.row(row, line)? {
                RowRef::Row(i) if self.rows[i].1 != RowType::N => self.range[i] = Some(v),
                _ => return Err(err(line, format!("RANGES entry on objective or free row '{row}'"))),
            }
        }
        Ok(())
    }

    fn bound_line(&mut self, toks: &[&str], line: usize) -> Result<()> {
        let kind = toks[0].to_ascii_uppercase();
        let valued = matches!(kind.as_str(), "LO" | "UP" | "FX" | "LI" | "UI");
        let rest = &toks[1..];
        // optional set name in front, optional value for BV
        let (col, value) = match (valued, rest.len()) {
            (true, 2) => (rest[0], Some(number(rest[1], line)?)),
            (true, 3) => (rest[1], Some(number(rest[2], line)?)),
            (false, 1) => (rest[0], None),
            (false, 2) if kind == "BV" && rest[1].parse::<f64>().is_ok() => (rest[0], Some(number(rest[1], line)?)),
            (false, 2) => (rest[1], None),
            (false, 3) if kind == "BV" => (rest[1], Some(number(rest[2], line)?)),
            _ => return Err(err(line, format!("malformed {kind} bound"))),
        };
        let j = self.column(col, line)?;
        let v = value.unwrap_or(0.0);
        match kind.as_str() {
            "LO" | "LI" => self.lower[j] = v,
            "UP" | "UI" => {
                if v < 0.0 && self.lower[j] == 0.0 {
                    self.lower[j] = -INF;
                }
                self.upper[j] = v;
            }
            "FX" => {
                self.lower[j] = v;
                self.upper[j] = v;
            }
            "FR" => {
                self.lower[j] = -INF;
                self.upper[j] = INF;
            }
            "MI" => self.lower[j] = -INF,
            "PL" => self.upper[j] = INF,
            "BV" => {
                self.lower[j] = 0.0;
                self.upper[j] = 1.0;
                self.integer[j] = true;
            }
            other => return Err(err(line, format!("unknown bound type '{other}'"))),
        }
        if matches!(kind.as_str(), "LI" | "UI") {
            self.integer[j] = true;
        }
        Ok(())
    }

    fn finish(self) -> Result<MpsModel> {
        let objective_name = self.objective.clone().ok_or_else(|| err(0, "no objective (N) row"))?;
        let m = self.rows.len();
        let mut rl = Vec::with_capacity(m);
        let mut ru = Vec::with_capacity(m);
        for (i, (_, t)) in self.rows.iter().enumerate() {
            let b = self.rhs[i];
            let (lo, hi) = match (t, self.range[i]) {
                (RowType::N, _) => (-INF, INF),
                (RowType::L, None) => (-INF, b),
                (RowType::G, None) => (b, INF),
                (RowType::E, None) => (b, b),
                (RowType::L, Some(r)) => (b - r.abs(), b),
                (RowType::G, Some(r)) => (b, b + r.abs()),
                (RowType::E, Some(r)) if r >= 0.0 => (b, b + r),
                (RowType::E, Some(r)) => (b + r, b),
            };
            rl.push(lo);
            ru.push(hi);
        }
        let n = self.cols.len();
        let a = SparseMatrix::from_triplets(m, n, &self.triplets)?;
        let c = if self.maximize { self.c.iter().map(|v| -v).collect() } else { self.c };
        let problem = LpProblem::new(a, c, Bounds::new(rl, ru)?, Bounds::new(self.lower, self.upper)?)?;
        Ok(MpsModel {
            name: self.name,
            objective_name,
            row_names: self.rows.into_iter().map(|(n, _)| n).collect(),
            col_names: self.cols,
            problem,
            integer: self.integer.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect(),
            objective_offset: if self.maximize { -self.objective_offset } else { self.objective_offset },
        })
    }
}

/// Parses free-format MPS text. A maximization sense is turned into
/// minimization by negating the objective.
pub fn parse_mps(text: &str) -> Result<MpsModel> {
    let mut p = Parser {
        name: String::new(),
        maximize: false,
        objective: None,
        rows: Vec::new(),
        row_index: HashMap::new(),
        cols: Vec::new(),
        col_index: HashMap::new(),
        c: Vec::new(),
        triplets: Vec::new(),
        rhs: Vec::new(),
        range: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
        integer: Vec::new(),
        in_integer: false,
        objective_offset: 0.0,
    };
    let mut section = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            let head = toks[0].to_ascii_uppercase();
            let next = match head.as_str() {
                "NAME" => {
                    p.name = toks[1..].join(" ");
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        p.maximize = s.eq_ignore_ascii_case("MAX") || s.eq_ignore_ascii_case("MAXIMIZE");
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(err(line, format!("unknown section '{other}'"))),
            };
            if !matches!(next, Section::Name | Section::ObjSense | Section::Rows) {
                let m = p.rows.len();
                p.rhs.resize(m, 0.0);
                p.range.resize(m, None);
            }
            if next == Section::End {
                return p.finish();
            }
            section = Some(next);
            continue;
        }
        match section {
            Some(Section::ObjSense) => {
                p.maximize = toks[0].eq_ignore_ascii_case("MAX") || toks[0].eq_ignore_ascii_case("MAXIMIZE");
            }
            Some(Section::Rows) => {
                if toks.len() != 2 {
                    return Err(err(line, "ROWS line needs a type and a name"));
                }
                p.add_row(toks[0], toks[1], line)?;
            }
            Some(Section::Columns) => p.column_line(&toks, line)?,
            Some(Section::Rhs) => p.rhs_line(&toks, line)?,
            Some(Section::Ranges) => p.range_line(&toks, line)?,
            Some(Section::Bounds) => {
                if toks.len() < 2 {
                    return Err(err(line, "malformed bound"));
                }
                p.bound_line(&toks, line)?
            }
            Some(Section::Name) | Some(Section::End) | None => return Err(err(line, "data line outside a section")),
        }
    }
    Err(err(text.lines().count(), "missing ENDATA"))
}

pub fn read_mps(path: impl AsRef<std::path::Path>) -> Result<MpsModel> {
    parse_mps(&std::fs::read_to_string(path)?)
}

fn fmt(v: f64) -> String {
    if v == INF {
        "1e30".into()
    } else if v == -INF {
        "-1e30".into()
    } else {
        format!("{v:?}")
    }
}

/// Writes free-format MPS. Numbers use the shortest representation that
/// reads back to the same `f64`.
pub fn write_mps(model: &MpsModel) -> String {
    let p = &model.problem;
    let (m, n) = (p.n_rows(), p.n_cols());
    let mut s = String::new();
    let name = if model.name.is_empty() { "BATCHLP" } else { &model.name };
    let _ = writeln!(s, "NAME {name}");
    let _ = writeln!(s, "ROWS");
    let _ = writeln!(s, " N {}", model.objective_name);
    let mut kinds = Vec::with_capacity(m);
    for i in 0..m {
        let iv = p.row_bounds.get(i);
        let k = match (iv.lower.is_finite(), iv.upper.is_finite()) {
            (false, false) => "N",
            _ if iv.lower == iv.upper => "E",
            (true, false) => "G",
            _ => "L",
        };
        kinds.push(k);
        let _ = writeln!(s, " {k} {}", model.row_names[i]);
    }
    let _ = writeln!(s, "COLUMNS");
    let at = p.a.transpose();
    let integer: std::collections::HashSet<usize> = model.integer.iter().copied().collect();
    let mut in_int = false;
    let mut marker = 0;
    for j in 0..n {
        let int = integer.contains(&j);
        if int != in_int {
            let tag = if int { "INTORG" } else { "INTEND" };
            let _ = writeln!(s, " MARKER{marker} 'MARKER' '{tag}'");
            marker += 1;
            in_int = int;
        }
        let col = &model.col_names[j];
        let (rows, vals) = at.row(j);
        if p.c[j] != 0.0 || rows.is_empty() {
            let _ = writeln!(s, " {col} {} {}", model.objective_name, fmt(p.c[j]));
        }
        for (&i, &v) in rows.iter().zip(vals) {
            let _ = writeln!(s, " {col} {} {}", model.row_names[i as usize], fmt(v));
        }
    }
    if in_int {
        let _ = writeln!(s, " MARKER{marker} 'MARKER' 'INTEND'");
    }
    let _ = writeln!(s, "RHS");
    if model.objective_offset != 0.0 {
        let _ = writeln!(s, " RHS {} {}", model.objective_name, fmt(-model.objective_offset));
    }
    let mut ranges = Vec::new();
    for i in 0..m {
        let iv = p.row_bounds.get(i);
        let rhs = match kinds[i] {
            "N" => continue,
            "G" | "E" => iv.lower,
            _ => iv.upper,
        };
        if rhs != 0.0 {
            let _ = writeln!(s, " RHS {} {}", model.row_names[i], fmt(rhs));
        }
        if kinds[i] == "L" && iv.lower.is_finite() {
            ranges.push((i, iv.upper - iv.lower));
        }
    }
    if !ranges.is_empty() {
        let _ = writeln!(s, "RANGES");
        for (i, r) in ranges {
            let _ = writeln!(s, " RNG {} {}", model.row_names[i], fmt(r));
        }
    }
    let _ = writeln!(s, "BOUNDS");
    for j in 0..n {
        let Interval { lower, upper } = p.var_bounds.get(j);
        let col = &model.col_names[j];
        if lower == upper {
            let _ = writeln!(s, " FX BND {col} {}", fmt(lower));
            continue;
        }
        match (lower, upper) {
            (l, u) if l == -INF && u == INF => {
                let _ = writeln!(s, " FR BND {col}");
            }
            (l, u) if l == -INF => {
                let _ = writeln!(s, " MI BND {col}");
                let _ = writeln!(s, " UP BND {col} {}", fmt(u));
            }
            (l, u) => {
                if l != 0.0 {
                    let _ = writeln!(s, " LO BND {col} {}", fmt(l));
                }
                if u.is_finite() {
                    let _ = writeln!(s, " UP BND {col} {}", fmt(u));
                }
            }
        }
    }
    let _ = writeln!(s, "ENDATA");
    s
}
