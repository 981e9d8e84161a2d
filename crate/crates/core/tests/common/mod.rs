#![allow(dead_code)]

use batchlp::bounds::{Bounds, Interval};
use batchlp::model::LpProblem;
use batchlp::sparse::SparseMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Feasible,
    PrimalInfeasible,
    Unbounded,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn half(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(2 * lo..=2 * hi) as f64 / 2.0
}

fn random_rows(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            let mut row: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.6) { rng.gen_range(-3..=3) as f64 } else { 0.0 })
                .collect();
            if row.iter().all(|v| *v == 0.0) {
                let j = rng.gen_range(0..n);
                row[j] = if rng.gen_bool(0.5) { 1.0 } else { -2.0 };
            }
            row
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn build(rows: &[Vec<f64>], n: usize, c: Vec<f64>, rb: Vec<Interval>, vb: Vec<Interval>) -> LpProblem {
    LpProblem::new(SparseMatrix::from_dense(rows, n).unwrap(), c, Bounds::from_intervals(&rb), Bounds::from_intervals(&vb)).unwrap()
}

/// Row interval around `v`, with each side possibly infinite.
fn around(rng: &mut ChaCha8Rng, v: f64) -> Interval {
    let lo = if rng.gen_bool(0.3) { -INF } else { v - half(rng, 0, 3) };
    let hi = if rng.gen_bool(0.3) && lo > -INF { INF } else { v + half(rng, 0, 3) };
    Interval::new(lo, hi)
}

/// A tiny random LP whose status is fixed by construction; `n + m ≤ max_size`.
pub fn tiny_lp(seed: u64, kind: Kind, max_size: usize) -> LpProblem {
    let mut r = rng(seed);
    let n = r.gen_range(1..=(max_size / 2).max(1));
    let m = r.gen_range(1..=(max_size - n).max(1)).min(max_size - n);
    match kind {
        Kind::Feasible => {
            let rows = random_rows(&mut r, m, n);
            let x0: Vec<f64> = (0..n).map(|_| half(&mut r, -2, 2)).collect();
            let vb: Vec<Interval> = x0
                .iter()
                .map(|&x| {
                    let lo = x - half(&mut r, 0, 3);
                    let hi = x + half(&mut r, 0, 3);
                    Interval::new(lo, hi)
                })
                .collect();
            let rb = rows.iter().map(|row| around(&mut r, dot(row, &x0))).collect();
            let c = (0..n).map(|_| r.gen_range(-4..=4) as f64).collect();
            build(&rows, n, c, rb, vb)
        }
        Kind::PrimalInfeasible => {
            let m = m.max(2).min(max_size - n).max(1);
            let mut rows = random_rows(&mut r, m - 1, n);
            let x0: Vec<f64> = (0..n).map(|_| half(&mut r, -2, 2)).collect();
            let free = r.gen_bool(0.5);
            let vb: Vec<Interval> = x0
                .iter()
                .map(|&x| {
                    if free && r.gen_bool(0.5) {
                        Interval::new(x - half(&mut r, 0, 2), INF)
                    } else {
                        Interval::new(x - half(&mut r, 0, 2), x + half(&mut r, 0, 2))
                    }
                })
                .collect();
            let mut rb: Vec<Interval> = rows.iter().map(|row| around(&mut r, dot(row, &x0))).collect();
            if let (false, Some(k)) = (rows.is_empty(), (0..rows.len()).collect::<Vec<_>>().choose(&mut r).copied()) {
                // a copy of row k pushed strictly beyond its own interval
                let row = rows[k].clone();
                let gap = half(&mut r, 1, 3);
                let iv = rb[k];
                let new = if iv.upper.is_finite() {
                    Interval::new(iv.upper + gap, INF)
                } else {
                    Interval::new(-INF, iv.lower - gap)
                };
                rows.push(row);
                rb.push(new);
            } else {
                // box-infeasible single row: lower bound above the box maximum
                let row = random_rows(&mut r, 1, n).remove(0);
                let max: f64 = row.iter().zip(&vb).map(|(a, b)| if *a > 0.0 { a * b.upper } else { a * b.lower }).sum();
                let max = if max.is_finite() { max } else { 0.0 };
                rows.push(row);
                rb.push(Interval::new(max + 1.0, INF));
            }
            // nonnegative cost on the unbounded-above variables keeps the dual feasible
            let c = vb
                .iter()
                .map(|b| if b.upper == INF { r.gen_range(0..=4) as f64 } else { r.gen_range(-4..=4) as f64 })
                .collect();
            build(&rows, n, c, rb, vb)
        }
        Kind::Unbounded => {
            let rows = random_rows(&mut r, m, n);
            let x0: Vec<f64> = (0..n).map(|_| half(&mut r, -2, 2)).collect();
            let d: Vec<f64> = (0..n).map(|_| r.gen_range(-2..=2) as f64).collect();
            let d = if d.iter().all(|v| *v == 0.0) {
                let mut d = d;
                d[0] = 1.0;
                d
            } else {
                d
            };
            let vb = x0
                .iter()
                .zip(&d)
                .map(|(&x, &dj)| {
                    let lo = if dj < 0.0 { -INF } else { x - half(&mut r, 0, 2) };
                    let hi = if dj > 0.0 { INF } else { x + half(&mut r, 0, 2) };
                    Interval::new(lo, hi)
                })
                .collect();
            let rb = rows
                .iter()
                .map(|row| {
                    let v = dot(row, &x0);
                    let ad = dot(row, &d);
                    let iv = around(&mut r, v);
                    let lo = if ad < 0.0 { -INF } else { iv.lower };
                    let hi = if ad > 0.0 { INF } else { iv.upper };
                    Interval::new(lo, hi.max(v))
                })
                .collect();
            // a random cost, then shifted so that c·d < 0
            let mut c: Vec<f64> = (0..n).map(|_| r.gen_range(-3..=3) as f64).collect();
            let cd = dot(&c, &d);
            let dd = dot(&d, &d);
            let shift = ((cd + 1.0) / dd).ceil();
            for j in 0..n {
                c[j] -= shift * d[j];
            }
            build(&rows, n, c, rb, vb)
        }
    }
}

/// Deterministic mix of the three kinds.
pub fn kind_for(i: u64) -> Kind {
    match i % 5 {
        0..=2 => Kind::Feasible,
        3 => Kind::PrimalInfeasible,
        _ => Kind::Unbounded,
    }
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}
