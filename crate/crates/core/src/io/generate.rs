//! Seeded generators for four combinatorial MIP families.
//!
//! The shapes follow the usual benchmark constructions (set covering,
//! combinatorial auctions, independent sets on Barabási–Albert graphs and
//! capacitated facility location). Instances are deterministic in the seed
//! but are not byte-compatible with any external generator.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{Bounds, Interval};
use crate::error::{Error, Result};
use crate::model::LpProblem;
use crate::sparse::SparseMatrix;

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SetCover,
    CombAuction,
    MaxIndSet,
    FacilityLocation,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::SetCover, Family::CombAuction, Family::MaxIndSet, Family::FacilityLocation];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::SetCover => "set-cover",
            Family::CombAuction => "comb-auction",
            Family::MaxIndSet => "max-ind-set",
            Family::FacilityLocation => "facility-loc",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "set-cover" | "setcover" | "sc" => Ok(Family::SetCover),
            "comb-auction" | "cauction" | "ca" => Ok(Family::CombAuction),
            "max-ind-set" | "indset" | "mis" => Ok(Family::MaxIndSet),
            "facility-loc" | "facility-location" | "cfl" | "fl" => Ok(Family::FacilityLocation),
            other => Err(Error::Generate(format!("unknown family '{other}'"))),
        }
    }
}

/// Size parameters of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InstanceSpec {
    SetCover { rows: usize, cols: usize, density: f64 },
    CombAuction { items: usize, bids: usize },
    MaxIndSet { nodes: usize, affinity: usize },
    FacilityLocation { customers: usize, facilities: usize, ratio: f64 },
}

impl InstanceSpec {
    pub fn family(&self) -> Family {
        match self {
            InstanceSpec::SetCover { .. } => Family::SetCover,
            InstanceSpec::CombAuction { .. } => Family::CombAuction,
            InstanceSpec::MaxIndSet { .. } => Family::MaxIndSet,
            InstanceSpec::FacilityLocation { .. } => Family::FacilityLocation,
        }
    }

    /// `inst_<sizes>` in the naming style of the usual benchmark tables.
    pub fn name(&self) -> String {
        match *self {
            InstanceSpec::SetCover { rows, cols, density } => format!("inst_{rows}r_{cols}c_{density}"),
            InstanceSpec::CombAuction { items, bids } => format!("inst_{items}_{bids}"),
            InstanceSpec::MaxIndSet { nodes, affinity } => format!("inst_{nodes}_{affinity}"),
            InstanceSpec::FacilityLocation {
                customers,
                facilities,
                ratio,
            } => format!("inst_{customers}_{facilities}_{ratio}"),
        }
    }

    /// Parses `a x b [x c]` size strings (`x` or `_` separated):
    /// set-cover `rows x cols x density`, comb-auction `items x bids`,
    /// max-ind-set `nodes x affinity`, facility-loc `customers x facilities x ratio`.
    pub fn parse(family: Family, sizes: &str) -> Result<Self> {
        let parts: Vec<&str> = sizes.split(['x', '_', 'X']).filter(|s| !s.is_empty()).collect();
        let bad = || Error::Generate(format!("cannot read sizes '{sizes}' for {family}"));
        let int = |i: usize| parts.get(i).and_then(|s| s.trim_end_matches(['r', 'c']).parse::<usize>().ok()).ok_or_else(bad);
        let real = |i: usize| parts.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad);
        let spec = match family {
            Family::SetCover => InstanceSpec::SetCover {
                rows: int(0)?,
                cols: int(1)?,
                density: real(2)?,
            },
            Family::CombAuction => InstanceSpec::CombAuction {
                items: int(0)?,
                bids: int(1)?,
            },
            Family::MaxIndSet => InstanceSpec::MaxIndSet {
                nodes: int(0)?,
                affinity: int(1)?,
            },
            Family::FacilityLocation => InstanceSpec::FacilityLocation {
                customers: int(0)?,
                facilities: int(1)?,
                ratio: real(2)?,
            },
        };
        let expected = if matches!(family, Family::CombAuction | Family::MaxIndSet) { 2 } else { 3 };
        if parts.len() != expected {
            return Err(bad());
        }
        Ok(spec)
    }
}

/// A generated MIP: its LP relaxation and the integer columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub name: String,
    pub spec: InstanceSpec,
    pub seed: u64,
    pub problem: LpProblem,
    pub integer: Vec<usize>,
}

pub fn generate(spec: InstanceSpec, seed: u64) -> Result<GeneratedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (problem, integer) = match spec {
        InstanceSpec::SetCover { rows, cols, density } => set_cover(rows, cols, density, &mut rng)?,
        InstanceSpec::CombAuction { items, bids } => comb_auction(items, bids, &mut rng)?,
        InstanceSpec::MaxIndSet { nodes, affinity } => {
            let edges = barabasi_albert(nodes, affinity, &mut rng)?;
            (independent_set(nodes, &edges)?, (0..nodes).collect())
        }
        InstanceSpec::FacilityLocation {
            customers,
            facilities,
            ratio,
        } => facility_location(customers, facilities, ratio, &mut rng)?,
    };
    Ok(GeneratedInstance {
        name: spec.name(),
        spec,
        seed,
        problem,
        integer,
    })
}

fn unit_box(n: usize) -> Bounds {
    Bounds::uniform(n, Interval::new(0.0, 1.0))
}

/// `min cᵀx, Ax ≥ 1, x ∈ [0,1]` with `round(rows·cols·density)` nonzeros.
/// Every column covers at least one row and every row is covered.
fn set_cover(rows: usize, cols: usize, density: f64, rng: &mut ChaCha8Rng) -> Result<(LpProblem, Vec<usize>)> {
    if rows == 0 || cols == 0 || !(density > 0.0 && density <= 1.0) {
        return Err(Error::Generate(format!("set-cover needs rows, cols ≥ 1 and density in (0, 1], got {rows}, {cols}, {density}")));
    }
    let total = ((rows * cols) as f64 * density).round() as usize;
    let total = total.max(rows.max(cols)).min(rows * cols);
    let mut entries: BTreeSet<(usize, usize)> = BTreeSet::new();
    // one entry per column, spread so that rows get covered first
    let mut row_order: Vec<usize> = (0..rows).collect();
    row_order.shuffle(rng);
    for j in 0..cols {
        let i = if j < rows { row_order[j] } else { rng.gen_range(0..rows) };
        entries.insert((i, j));
    }
    for &i in row_order.iter().skip(cols) {
        entries.insert((i, rng.gen_range(0..cols)));
    }
    while entries.len() < total {
        entries.insert((rng.gen_range(0..rows), rng.gen_range(0..cols)));
    }
    let trip: Vec<(usize, usize, f64)> = entries.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    let a = SparseMatrix::from_triplets(rows, cols, &trip)?;
    let c = (0..cols).map(|_| rng.gen_range(1..=100) as f64).collect();
    let p = LpProblem::new(a, c, Bounds::uniform(rows, Interval::new(1.0, INF)), unit_box(cols))?;
    Ok((p, (0..cols).collect()))
}

/// Packing formulation: one row `Σ x_b ≤ 1` per item that appears in some
/// bid, objective `−price`.
fn comb_auction(items: usize, bids: usize, rng: &mut ChaCha8Rng) -> Result<(LpProblem, Vec<usize>)> {
    if items == 0 || bids == 0 {
        return Err(Error::Generate(format!("comb-auction needs items, bids ≥ 1, got {items}, {bids}")));
    }
    let values: Vec<f64> = (0..items).map(|_| rng.gen_range(1.0..100.0)).collect();
    let max_bundle = items.min(5);
    let mut trip = Vec::new();
    let mut price = Vec::with_capacity(bids);
    for b in 0..bids {
        let k = rng.gen_range(1..=max_bundle);
        // bundles are built around a random item and its neighbours
        let center = rng.gen_range(0..items);
        let mut bundle = BTreeSet::new();
        bundle.insert(center);
        while bundle.len() < k {
            let off = rng.gen_range(0..items.min(2 * max_bundle + 1));
            bundle.insert((center + off) % items);
        }
        let v: f64 = bundle.iter().map(|&i| values[i]).sum();
        price.push((v * rng.gen_range(1.0..1.5)).round());
        trip.extend(bundle.into_iter().map(|i| (i, b, 1.0)));
    }
    // drop items nobody bid on
    let mut used: Vec<usize> = trip.iter().map(|t| t.0).collect();
    used.sort_unstable();
    used.dedup();
    let mut index = vec![usize::MAX; items];
    for (r, &i) in used.iter().enumerate() {
        index[i] = r;
    }
    let trip: Vec<_> = trip.into_iter().map(|(i, b, v)| (index[i], b, v)).collect();
    let m = used.len();
    let a = SparseMatrix::from_triplets(m, bids, &trip)?;
    let c = price.iter().map(|p| -p).collect();
    let p = LpProblem::new(a, c, Bounds::uniform(m, Interval::new(-INF, 1.0)), unit_box(bids))?;
    Ok((p, (0..bids).collect()))
}

/// Barabási–Albert preferential attachment. The first `affinity + 1` nodes
/// form a clique; every later node attaches to `affinity` distinct earlier
/// nodes with probability proportional to degree.
pub fn barabasi_albert(nodes: usize, affinity: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    if nodes == 0 || affinity == 0 {
        return Err(Error::Generate(format!("max-ind-set needs nodes, affinity ≥ 1, got {nodes}, {affinity}")));
    }
    let core = (affinity + 1).min(nodes);
    let mut edges = Vec::new();
    let mut ends: Vec<usize> = Vec::new();
    for i in 0..core {
        for j in i + 1..core {
            edges.push((i, j));
            ends.extend([i, j]);
        }
    }
    for v in core..nodes {
        let mut targets = BTreeSet::new();
        while targets.len() < affinity {
            targets.insert(ends[rng.gen_range(0..ends.len())]);
        }
        for t in targets {
            edges.push((t, v));
            ends.extend([t, v]);
        }
    }
    Ok(edges)
}

/// `max Σx` as `min −Σx` with one row `x_i + x_j ≤ 1` per edge.
pub fn independent_set(nodes: usize, edges: &[(usize, usize)]) -> Result<LpProblem> {
    let mut trip = Vec::with_capacity(2 * edges.len());
    for (r, &(i, j)) in edges.iter().enumerate() {
        if i == j || i >= nodes || j >= nodes {
            return Err(Error::Generate(format!("invalid edge ({i}, {j}) on {nodes} nodes")));
        }
        trip.push((r, i, 1.0));
        trip.push((r, j, 1.0));
    }
    let m = edges.len();
    let a = SparseMatrix::from_triplets(m, nodes, &trip)?;
    LpProblem::new(a, vec![-1.0; nodes], Bounds::uniform(m, Interval::new(-INF, 1.0)), unit_box(nodes))
}

/// Capacitated facility location. Columns are the assignments `x_ij`
/// (customer-major) followed by the openings `y_j`. Rows: demand, capacity,
/// total capacity, then one `x_ij ≤ y_j` row per pair.
fn facility_location(customers: usize, facilities: usize, ratio: f64, rng: &mut ChaCha8Rng) -> Result<(LpProblem, Vec<usize>)> {
    if customers == 0 || facilities == 0 || !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Generate(format!(
            "facility-loc needs customers, facilities ≥ 1 and ratio > 0, got {customers}, {facilities}, {ratio}"
        )));
    }
    let (c, f) = (customers, facilities);
    let pos = |rng: &mut ChaCha8Rng, k: usize| -> Vec<(f64, f64)> { (0..k).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect() };
    let cpos = pos(rng, c);
    let fpos = pos(rng, f);
    let demand: Vec<f64> = (0..c).map(|_| rng.gen_range(5..=35) as f64).collect();
    let raw_cap: Vec<f64> = (0..f).map(|_| rng.gen_range(10..=160) as f64).collect();
    let scale = ratio * demand.iter().sum::<f64>() / raw_cap.iter().sum::<f64>();
    let capacity: Vec<f64> = raw_cap.iter().map(|s| (s * scale).round().max(1.0)).collect();
    let fixed: Vec<f64> = capacity
        .iter()
        .map(|s| (rng.gen_range(100.0..110.0) * s.sqrt() + rng.gen_range(0.0..90.0)).round())
        .collect();

    let n = c * f + f;
    let y = |j: usize| c * f + j;
    let x = |i: usize, j: usize| i * f + j;
    let mut cost = vec![0.0; n];
    for i in 0..c {
        for j in 0..f {
            let d = ((cpos[i].0 - fpos[j].0).powi(2) + (cpos[i].1 - fpos[j].1).powi(2)).sqrt();
            cost[x(i, j)] = (10.0 * d * demand[i] * 100.0).round() / 100.0;
        }
    }
    for j in 0..f {
        cost[y(j)] = fixed[j];
    }
    let mut trip = Vec::with_capacity(4 * c * f + 2 * f);
    let mut rows = Vec::new();
    for i in 0..c {
        for j in 0..f {
            trip.push((rows.len(), x(i, j), 1.0));
        }
        rows.push(Interval::new(1.0, INF));
    }
    for j in 0..f {
        let r = rows.len();
        for i in 0..c {
            trip.push((r, x(i, j), demand[i]));
        }
        trip.push((r, y(j), -capacity[j]));
        rows.push(Interval::new(-INF, 0.0));
    }
    let r = rows.len();
    for j in 0..f {
        trip.push((r, y(j), capacity[j]));
    }
    rows.push(Interval::new(demand.iter().sum(), INF));
    for i in 0..c {
        for j in 0..f {
            let r = rows.len();
            trip.push((r, x(i, j), 1.0));
            trip.push((r, y(j), -1.0));
            rows.push(Interval::new(-INF, 0.0));
        }
    }
    let a = SparseMatrix::from_triplets(rows.len(), n, &trip)?;
    let p = LpProblem::new(a, cost, Bounds::from_intervals(&rows), unit_box(n))?;
    Ok((p, (c * f..n).collect()))
}
