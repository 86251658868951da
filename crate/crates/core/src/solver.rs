//! Unsupervised clustering by direct optimization of per-node logits.
//!
//! The logits `Θ ∈ R^{N×K}` are initialized from features smoothed over the
//! graph and projected onto `K` random directions, then optimized with
//! Adam against an [`ObjectiveSpec`]. `S = softmax(Θ)` row-wise and hard
//! labels are the row argmax of the best `S` seen.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::objectives::{softmax_chain, LossKind, Objective, ObjectiveSpec};
use crate::select::{row_argmax, softmax_rows};

/// Minimum absolute decrease of the loss that resets the patience counter.
pub const IMPROVEMENT_THRESHOLD: f64 = 1e-6;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const INIT_NOISE_STD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub objective: ObjectiveSpec,
    pub num_clusters: usize,
    pub max_iters: usize,
    pub lr: f64,
    pub patience: usize,
    pub seed: u64,
    pub feature_smoothing_steps: usize,
}

impl SolverConfig {
    pub fn new(objective: ObjectiveSpec, num_clusters: usize) -> Self {
        Self {
            objective,
            num_clusters,
            max_iters: 2000,
            lr: 5e-2,
            patience: 500,
            seed: 0,
            feature_smoothing_steps: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_clusters < 2 {
            return Err(PoolError::InvalidArgument("K must be at least 2".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(PoolError::InvalidArgument("learning rate must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(PoolError::InvalidArgument("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub iter: usize,
    pub total: f64,
    pub terms: Vec<(LossKind, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub labels: Vec<usize>,
    /// Soft assignment at the best iteration.
    pub soft: DMatrix<f64>,
    pub history: Vec<HistoryEntry>,
    /// Last iteration run.
    pub converged_at: usize,
    pub best_iter: usize,
    pub best_loss: f64,
}

/// `(D^{-1/2}(A+I)D^{-1/2})^t X`, degrees taken on `A + I`.
pub fn smooth_features(g: &Graph, x: &DMatrix<f64>, steps: usize) -> DMatrix<f64> {
    let mut deg: Vec<f64> = g.degrees().iter().map(|d| d + 1.0).collect();
    deg.iter_mut().for_each(|d| *d = if *d > 0.0 { 1.0 / d.sqrt() } else { 0.0 });
    let mut cur = x.clone();
    for _ in 0..steps {
        let mut next = cur.clone();
        // The identity part.
        for (i, mut row) in next.row_iter_mut().enumerate() {
            row *= deg[i] * deg[i];
        }
        for &(i, j, w) in g.edges() {
            let scale = w * deg[i] * deg[j];
            for c in 0..cur.ncols() {
                next[(i, c)] += scale * cur[(j, c)];
            }
        }
        cur = next;
    }
    cur
}

/// Initial logits: smoothed features times a Gaussian `F × K` projection
/// scaled by `1/√F`, plus `N(0, 0.01²)` noise. Without features the logits
/// are standard normal.
pub fn initial_logits(g: &Graph, cfg: &SolverConfig) -> DMatrix<f64> {
    let n = g.num_nodes();
    let k = cfg.num_clusters;
    let f = g.num_features();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    if f == 0 || cfg.feature_smoothing_steps == 0 {
        return DMatrix::from_fn(n, k, |_, _| std_normal.sample(&mut rng));
    }
    let smoothed = smooth_features(g, g.features(), cfg.feature_smoothing_steps);
    let scale = 1.0 / (f as f64).sqrt();
    let w = DMatrix::from_fn(f, k, |_, _| std_normal.sample(&mut rng) * scale);
    let noise = Normal::new(0.0, INIT_NOISE_STD).expect("valid normal");
    smoothed * w + DMatrix::from_fn(n, k, |_, _| noise.sample(&mut rng))
}

pub fn cluster(g: &Graph, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let theta = initial_logits(g, cfg);
    cluster_from_logits(g, cfg, theta)
}

/// Runs the optimization from explicit initial logits.
pub fn cluster_from_logits(
    g: &Graph,
    cfg: &SolverConfig,
    mut theta: DMatrix<f64>,
) -> Result<SolveResult> {
    cfg.validate()?;
    if theta.shape() != (g.num_nodes(), cfg.num_clusters) {
        return Err(PoolError::InvalidArgument("initial logits have the wrong shape".into()));
    }
    let objective = Objective::new(cfg.objective.clone(), g);
    let (n, k) = theta.shape();
    let mut m = DMatrix::<f64>::zeros(n, k);
    let mut v = DMatrix::<f64>::zeros(n, k);
    let mut history = Vec::with_capacity(cfg.max_iters);

    let mut best_loss = f64::INFINITY;
    let mut best_s = DMatrix::zeros(n, k);
    let mut best_iter = 0;
    let mut reference = f64::INFINITY;
    let mut wait = 0;
    let mut last = 0;

    for iter in 0..cfg.max_iters {
        last = iter;
        let s = softmax_rows(&theta);
        let eval = objective.evaluate(&s)?;
        if !eval.total.is_finite() {
            return Err(PoolError::NonFinite("loss"));
        }
        history.push(HistoryEntry {
            iter,
            total: eval.total,
            terms: eval.terms,
        });
        if eval.total < best_loss {
            best_loss = eval.total;
            best_s.copy_from(&s);
            best_iter = iter;
        }
        if eval.total <= reference - IMPROVEMENT_THRESHOLD {
            reference = eval.total;
            wait = 0;
        } else {
            wait += 1;
            if wait >= cfg.patience {
                break;
            }
        }

        let grad = softmax_chain(&eval.grad_s, &s);
        let t = (iter + 1) as i32;
        let bc1 = 1.0 - BETA1.powi(t);
        let bc2 = 1.0 - BETA2.powi(t);
        for idx in 0..n * k {
            let gr = grad[idx];
            m[idx] = BETA1 * m[idx] + (1.0 - BETA1) * gr;
            v[idx] = BETA2 * v[idx] + (1.0 - BETA2) * gr * gr;
            let m_hat = m[idx] / bc1;
            let v_hat = v[idx] / bc2;
            theta[idx] -= cfg.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }

    let labels = (0..n).map(|i| row_argmax(&best_s, i)).collect();
    Ok(SolveResult {
        labels,
        soft: best_s,
        history,
        converged_at: last,
        best_iter,
        best_loss,
    })
}
