//! Timing harness comparing direct, cached and pre-coarsened pooling.
//!
//! Every mode pools the same sequence of mini-batches. `Direct` runs the
//! full pooler on each graph, `Cached` keeps one [`CachedPooler`] slot per
//! graph so only Reduce runs after the first pass, and `Precoarsen` builds
//! a TGPC cache up front and then only collates and reduces. One untimed
//! warm-up pass precedes the `repeat` timed passes.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::pipeline::{load_and_collate, precoarsen_to_bytes, CachedPooler, PoolCache};
use crate::pool::Pooler;

/// Minimum number of timed repetitions.
pub const MIN_REPEAT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Direct,
    Cached,
    Precoarsen,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Cached => "cached",
            Self::Precoarsen => "precoarsen",
        }
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMode {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "cached" => Ok(Self::Cached),
            "precoarsen" => Ok(Self::Precoarsen),
            other => Err(PoolError::InvalidArgument(format!("unknown bench mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub mode: BenchMode,
    pub repeat: usize,
    pub batch_size: usize,
    pub jobs: usize,
}

impl BenchConfig {
    pub fn new(mode: BenchMode) -> Self {
        Self {
            mode,
            repeat: MIN_REPEAT,
            batch_size: 32,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub mode: BenchMode,
    pub repeat: usize,
    pub num_batches: usize,
    /// Mean seconds per batch of each timed repetition; empty on N/C.
    pub per_repeat: Vec<f64>,
    /// Time spent building the cache (precoarsen) or filling the slots
    /// (cached); zero for direct.
    pub setup_secs: f64,
    /// Graphs on which the selector did not converge.
    pub not_converged: usize,
}

impl BenchReport {
    /// `None` when some graph did not converge.
    pub fn mean(&self) -> Option<f64> {
        if self.not_converged > 0 || self.per_repeat.is_empty() {
            return None;
        }
        Some(self.per_repeat.iter().sum::<f64>() / self.per_repeat.len() as f64)
    }

    /// Sample standard deviation over repetitions.
    pub fn std(&self) -> Option<f64> {
        let mean = self.mean()?;
        let r = self.per_repeat.len();
        if r < 2 {
            return Some(0.0);
        }
        let var = self.per_repeat.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
        Some(var.sqrt())
    }

    fn not_converged(mode: BenchMode, repeat: usize, num_batches: usize, n: usize) -> Self {
        Self {
            mode,
            repeat,
            num_batches,
            per_repeat: Vec::new(),
            setup_secs: 0.0,
            not_converged: n,
        }
    }
}

/// `baseline / other`, i.e. how many times faster `other` is.
pub fn speedup(baseline: &BenchReport, other: &BenchReport) -> Option<f64> {
    Some(baseline.mean()? / other.mean()?)
}

fn is_nc(e: &PoolError) -> bool {
    matches!(e, PoolError::NoConvergence(_) | PoolError::PowerIterationNoConvergence(_))
}

fn batches(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0..n)
        .collect::<Vec<_>>()
        .chunks(size)
        .map(|c| c.to_vec())
        .collect()
}

type BatchFn<'a> = dyn FnMut(&[usize]) -> Result<()> + 'a;

/// Runs one pass and returns the mean seconds per batch.
fn timed_pass(batches: &[Vec<usize>], mut run: impl FnMut(&[usize]) -> Result<()>) -> Result<f64> {
    let mut total = 0.0;
    for ids in batches {
        let t = Instant::now();
        run(ids)?;
        total += t.elapsed().as_secs_f64();
    }
    Ok(total / batches.len() as f64)
}

pub fn run_bench(graphs: &[Graph], pooler: &Pooler, cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.repeat < MIN_REPEAT {
        return Err(PoolError::InvalidArgument(format!(
            "repeat must be at least {MIN_REPEAT}"
        )));
    }
    if cfg.batch_size == 0 || graphs.is_empty() {
        return Err(PoolError::InvalidArgument("need a positive batch size and at least one graph".into()));
    }
    let batches = batches(graphs.len(), cfg.batch_size);
    let nb = batches.len();
    let mut setup_secs = 0.0;

    let mut pass: Box<BatchFn> = match cfg.mode {
        BenchMode::Direct => {
            let mut nc = 0;
            for g in graphs {
                match pooler.pool(g) {
                    Ok(_) => {}
                    Err(e) if is_nc(&e) => nc += 1,
                    Err(e) => return Err(e),
                }
            }
            if nc > 0 {
                return Ok(BenchReport::not_converged(cfg.mode, cfg.repeat, nb, nc));
            }
            Box::new(|ids| {
                for &id in ids {
                    std::hint::black_box(pooler.pool(&graphs[id])?);
                }
                Ok(())
            })
        }
        BenchMode::Cached => {
            let t = Instant::now();
            let slots: Vec<CachedPooler> = graphs.iter().map(|_| CachedPooler::new(pooler.clone())).collect();
            let mut nc = 0;
            for (slot, g) in slots.iter().zip(graphs) {
                match slot.pool(g) {
                    Ok(_) => {}
                    Err(e) if is_nc(&e) => nc += 1,
                    Err(e) => return Err(e),
                }
            }
            setup_secs = t.elapsed().as_secs_f64();
            if nc > 0 {
                return Ok(BenchReport::not_converged(cfg.mode, cfg.repeat, nb, nc));
            }
            Box::new(move |ids| {
                for &id in ids {
                    std::hint::black_box(slots[id].pool(&graphs[id])?);
                }
                Ok(())
            })
        }
        BenchMode::Precoarsen => {
            let t = Instant::now();
            let bytes = precoarsen_to_bytes(graphs, pooler, cfg.jobs)?;
            let cache = PoolCache::from_bytes(&bytes, pooler)?;
            setup_secs = t.elapsed().as_secs_f64();
            let nc = cache.records().iter().filter(|r| r.pooled.is_none()).count();
            if nc > 0 {
                return Ok(BenchReport::not_converged(cfg.mode, cfg.repeat, nb, nc));
            }
            let aggr = pooler.reduce;
            Box::new(move |ids| {
                let batch = load_and_collate(&cache, graphs, ids)?;
                std::hint::black_box(batch.reduce(aggr)?);
                Ok(())
            })
        }
    };

    // Warm-up.
    timed_pass(&batches, &mut pass)?;
    let per_repeat = (0..cfg.repeat)
        .map(|_| timed_pass(&batches, &mut pass))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        mode: cfg.mode,
        repeat: cfg.repeat,
        num_batches: nb,
        per_repeat,
        setup_secs,
        not_converged: 0,
    })
}
