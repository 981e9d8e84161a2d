//! Batch width selection by timing `AX` and `AᵀY` on the host.
//!
//! Timings are only meaningful with exclusive use of the machine; callers
//! must not run other solves concurrently.

use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{spmm_into, DenseBlock, Op, SparseMatrix};

pub const DEFAULT_CANDIDATES: [usize; 7] = [32, 64, 128, 256, 512, 1024, 2048];
pub const DEFAULT_REPETITIONS: usize = 10;
pub const MIN_REPETITIONS: usize = 3;
const WARMUP_ROUNDS: usize = 2;
const BLOCK_SEED: u64 = 0x7b10c;

pub const CSV_HEADER: [&str; 5] = ["width", "repetitions", "total_s", "per_column_s", "clamped"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpmmTiming {
    pub width: usize,
    pub repetitions: usize,
    /// Seconds for all repetitions of `AX` followed by `AᵀY`, loop overhead removed.
    pub total: f64,
    pub per_column: f64,
    /// The overhead subtraction went negative and was clamped to zero.
    pub clamped: bool,
}

/// The dense input blocks used for timing; identical for equal arguments.
pub fn timing_blocks(a: &SparseMatrix, width: usize) -> (DenseBlock, DenseBlock) {
    let mut rng = ChaCha8Rng::seed_from_u64(BLOCK_SEED);
    let mut fill = |rows: usize| {
        let data = (0..rows * width).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DenseBlock::from_column_major(rows, width, data).expect("sized by construction")
    };
    let x = fill(a.n_cols());
    let y = fill(a.n_rows());
    (x, y)
}

/// Times `repetitions` rounds of `AX` and `AᵀY` after two untimed warm-up
/// rounds.
pub fn measure_spmm(a: &SparseMatrix, width: usize, repetitions: usize) -> Result<SpmmTiming> {
    if width == 0 {
        return Err(Error::InvalidRequest("width must be at least 1".into()));
    }
    if repetitions < MIN_REPETITIONS {
        return Err(Error::InvalidRequest(format!("need at least {MIN_REPETITIONS} repetitions, got {repetitions}")));
    }
    let (x, y) = timing_blocks(a, width);
    let mut ax = DenseBlock::zeros(a.n_rows(), width);
    let mut aty = DenseBlock::zeros(a.n_cols(), width);
    let round = |ax: &mut DenseBlock, aty: &mut DenseBlock| -> Result<()> {
        spmm_into(a, black_box(&x), Op::Plain, width, ax)?;
        spmm_into(a, black_box(&y), Op::Transpose, width, aty)?;
        black_box((ax.data().first(), aty.data().first()));
        Ok(())
    };
    for _ in 0..WARMUP_ROUNDS {
        round(&mut ax, &mut aty)?;
    }
    let start = Instant::now();
    for _ in 0..repetitions {
        round(&mut ax, &mut aty)?;
    }
    let raw = start.elapsed().as_secs_f64();

    let start = Instant::now();
    for i in 0..repetitions {
        black_box(i);
    }
    let overhead = start.elapsed().as_secs_f64();

    let net = raw - overhead;
    let clamped = net < 0.0;
    let total = net.max(0.0);
    Ok(SpmmTiming {
        width,
        repetitions,
        total,
        per_column: total / width as f64,
        clamped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub timings: Vec<SpmmTiming>,
    pub chosen: usize,
}

impl TuneReport {
    /// Picks the smallest time per column; ties go to the larger width.
    pub fn from_timings(timings: Vec<SpmmTiming>) -> Result<Self> {
        let chosen = pick(&timings).ok_or_else(|| Error::InvalidRequest("no candidate widths".into()))?;
        Ok(TuneReport { timings, chosen })
    }

    pub fn timing(&self, width: usize) -> Option<&SpmmTiming> {
        self.timings.iter().find(|t| t.width == width)
    }

    /// The chosen width is a candidate with the minimal time per column.
    pub fn is_consistent(&self) -> bool {
        match self.timing(self.chosen) {
            Some(c) => self.timings.iter().all(|t| c.per_column <= t.per_column),
            None => false,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for t in &self.timings {
            w.write_record([
                t.width.to_string(),
                t.repetitions.to_string(),
                format!("{:e}", t.total),
                format!("{:e}", t.per_column),
                t.clamped.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

fn pick(timings: &[SpmmTiming]) -> Option<usize> {
    timings
        .iter()
        .min_by(|a, b| a.per_column.total_cmp(&b.per_column).then(b.width.cmp(&a.width)))
        .map(|t| t.width)
}

pub fn tune(a: &SparseMatrix, candidates: &[usize], repetitions: usize) -> Result<TuneReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidRequest("candidate list is empty".into()));
    }
    let timings = candidates
        .iter()
        .map(|&w| measure_spmm(a, w, repetitions))
        .collect::<Result<Vec<_>>>()?;
    TuneReport::from_timings(timings)
}

/// The candidate width with the best measured throughput.
pub fn choose_batch_size(a: &SparseMatrix, candidates: &[usize]) -> Result<usize> {
    Ok(tune(a, candidates, DEFAULT_REPETITIONS)?.chosen)
}
