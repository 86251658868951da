//! Auxiliary clustering objectives of dense soft-assignment poolers.
//!
//! Each loss is a function of a row-stochastic `S ∈ R^{N×K}` (and the
//! graph, where relevant) returning its value together with the analytic
//! gradient `∂loss/∂S`. Normalizations keep every loss bounded:
//!
//! | loss            | value                                         | range          |
//! |-----------------|-----------------------------------------------|----------------|
//! | `mincut-cut`    | `−Tr(SᵀAS) / Tr(SᵀDS)`                        | `[−1, 0]`      |
//! | `mincut-ortho`  | `‖SᵀS/‖SᵀS‖_F − I/√K‖_F`                      | `[0, √2]`      |
//! | `dmon-mod`      | `−Tr(SᵀBS) / 2m`, `B = A − ddᵀ/2m`            | `[−1, 1/2]`    |
//! | `dmon-collapse` | `(√K/N)·‖Sᵀ1‖₂ − 1`                           | `[0, √K − 1]`  |
//! | `diff-lp`       | `‖A − SSᵀ‖_F / N²`                            | `≥ 0`          |
//! | `diff-ent`      | mean row entropy (natural log)                | `[0, ln K]`    |
//! | `justbalance`   | `−Tr((SᵀS)^{1/2}) / √(NK)`                    | `[−1, 0)`      |
//! | `tv`            | `Σ a_ij ‖S_i − S_j‖₁ / (2·vol)`               | `[0, 1]`       |
//! | `asym-balance`  | `1 − Σ_k ‖S_·k − mean_k‖₁ / (N(K−1))`          | `[1 − 2/K, 1]` |
//! | `hosc-cut`      | mincut ratio on `αA + (1−α)A_Δ`               | `[−1, 0]`      |
//!
//! `A_Δ` counts, per node pair, the triangles containing both endpoints.
//! Subgradients of `|·|` are taken as 0 at the kink.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::sparse::CooMatrix;

/// Edge limit (undirected) for the triangle counting behind `hosc-cut`.
pub const HOSC_MAX_EDGES: usize = 50_000;

pub const DEFAULT_HOSC_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub name: String,
    pub value: f64,
    pub grad_s: DMatrix<f64>,
}

impl LossValue {
    fn new(kind: LossKind, value: f64, grad_s: DMatrix<f64>) -> Self {
        Self {
            name: kind.name().to_string(),
            value,
            grad_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossKind {
    MincutCut,
    MincutOrtho,
    DmonMod,
    DmonCollapse,
    DiffLp,
    DiffEnt,
    JustBalance,
    Tv,
    AsymBalance,
    HoscCut,
}

impl LossKind {
    pub const ALL: [LossKind; 10] = [
        Self::MincutCut,
        Self::MincutOrtho,
        Self::DmonMod,
        Self::DmonCollapse,
        Self::DiffLp,
        Self::DiffEnt,
        Self::JustBalance,
        Self::Tv,
        Self::AsymBalance,
        Self::HoscCut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MincutCut => "mincut-cut",
            Self::MincutOrtho => "mincut-ortho",
            Self::DmonMod => "dmon-mod",
            Self::DmonCollapse => "dmon-collapse",
            Self::DiffLp => "diff-lp",
            Self::DiffEnt => "diff-ent",
            Self::JustBalance => "justbalance",
            Self::Tv => "tv",
            Self::AsymBalance => "asym-balance",
            Self::HoscCut => "hosc-cut",
        }
    }

    /// Whether the loss contains `|·|` terms (non-differentiable kinks).
    pub fn has_kinks(self) -> bool {
        matches!(self, Self::Tv | Self::AsymBalance)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PoolError::UnknownLoss(s.to_string()))
    }
}

fn check_s(s: &DMatrix<f64>, n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if s.nrows() != n {
            return Err(PoolError::InvalidArgument(format!(
                "S has {} rows, graph has {n} nodes",
                s.nrows()
            )));
        }
    }
    if s.ncols() == 0 || s.nrows() == 0 {
        return Err(PoolError::InvalidArgument("S must be non-empty".into()));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(PoolError::NonFinite("S"));
    }
    Ok(())
}

/// Frobenius inner product.
fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `−Tr(SᵀAS)/Tr(SᵀDS)` and its gradient for a symmetric adjacency.
fn ratio_cut(s: &DMatrix<f64>, adj: &CooMatrix, deg: &[f64]) -> Result<(f64, DMatrix<f64>)> {
    let a_s = adj.mul_dense(s);
    let num = inner(s, &a_s);
    let mut d_s = s.clone();
    for (i, mut row) in d_s.row_iter_mut().enumerate() {
        row *= deg[i];
    }
    let den = inner(s, &d_s);
    if den == 0.0 {
        return Err(PoolError::ZeroDegreeTrace);
    }
    let grad = (a_s * (2.0 * den) - d_s * (2.0 * num)) / (-den * den);
    Ok((-num / den, grad))
}

pub fn loss_mincut_cut(s: &DMatrix<f64>, g: &Graph) -> Result<LossValue> {
    check_s(s, Some(g.num_nodes()))?;
    g.require_nonnegative_symmetric()?;
    let (v, grad) = ratio_cut(s, g.adjacency(), &g.degrees())?;
    Ok(LossValue::new(LossKind::MincutCut, v, grad))
}

pub fn loss_mincut_ortho(s: &DMatrix<f64>) -> Result<LossValue> {
    check_s(s, None)?;
    let k = s.ncols();
    let m = s.transpose() * s;
    let norm_m = m.norm();
    if norm_m == 0.0 {
        return Err(PoolError::InvalidArgument("SᵀS is zero".into()));
    }
    let target = DMatrix::<f64>::identity(k, k) / (k as f64).sqrt();
    let r = &m / norm_m - target;
    let value = r.norm();
    if value == 0.0 {
        return Ok(LossValue::new(LossKind::MincutOrtho, 0.0, DMatrix::zeros(s.nrows(), k)));
    }
    // f = ‖M/‖M‖ − T‖; ∂f/∂M = G/‖M‖ − M·⟨M, G⟩/‖M‖³ with G = R/f.
    let g_p = &r / value;
    let g_m = &g_p / norm_m - &m * (inner(&m, &g_p) / norm_m.powi(3));
    let grad = s * (&g_m + g_m.transpose());
    Ok(LossValue::new(LossKind::MincutOrtho, value, grad))
}

pub fn loss_dmon(s: &DMatrix<f64>, g: &Graph) -> Result<LossValue> {
    check_s(s, Some(g.num_nodes()))?;
    g.require_nonnegative_symmetric()?;
    let deg = g.degrees();
    let two_m: f64 = deg.iter().sum();
    if two_m == 0.0 {
        return Err(PoolError::ZeroEdges);
    }
    let a_s = g.adjacency().mul_dense(s);
    let d = nalgebra::DVector::from_vec(deg);
    let dts = s.transpose() * &d; // K
    let tr_bs = inner(s, &a_s) - dts.norm_squared() / two_m;
    let value = -tr_bs / two_m;
    let grad = (a_s * 2.0 - (&d * dts.transpose()) * (2.0 / two_m)) / (-two_m);
    Ok(LossValue::new(LossKind::DmonMod, value, grad))
}

pub fn loss_dmon_collapse(s: &DMatrix<f64>) -> Result<LossValue> {
    check_s(s, None)?;
    let (n, k) = s.shape();
    let colsum = s.row_sum(); // 1 × K
    let norm = colsum.norm();
    let scale = (k as f64).sqrt() / n as f64;
    let value = scale * norm - 1.0;
    let mut grad = DMatrix::zeros(n, k);
    if norm > 0.0 {
        for mut row in grad.row_iter_mut() {
            row.copy_from(&(&colsum * (scale / norm)));
        }
    }
    Ok(LossValue::new(LossKind::DmonCollapse, value, grad))
}

pub fn loss_diff_lp(s: &DMatrix<f64>, g: &Graph) -> Result<LossValue> {
    check_s(s, Some(g.num_nodes()))?;
    g.require_symmetric()?;
    let n = s.nrows() as f64;
    let r = g.dense_adjacency() - s * s.transpose();
    let norm = r.norm();
    let value = norm / (n * n);
    let grad = if norm > 0.0 {
        (&r * s) * (-2.0 / (n * n * norm))
    } else {
        DMatrix::zeros(s.nrows(), s.ncols())
    };
    Ok(LossValue::new(LossKind::DiffLp, value, grad))
}

pub fn loss_diff_ent(s: &DMatrix<f64>) -> Result<LossValue> {
    check_s(s, None)?;
    let n = s.nrows() as f64;
    let mut value = 0.0;
    let grad = s.map(|p| {
        if p > 0.0 {
            value -= p * p.ln();
        }
        -(p.max(f64::MIN_POSITIVE).ln() + 1.0) / n
    });
    Ok(LossValue::new(LossKind::DiffEnt, value / n, grad))
}

pub fn loss_justbalance(s: &DMatrix<f64>) -> Result<LossValue> {
    check_s(s, None)?;
    let (n, k) = s.shape();
    let m = s.transpose() * s;
    let eig = m.symmetric_eigen();
    let trace_sqrt: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    let scale = 1.0 / ((n * k) as f64).sqrt();
    let inv_sqrt = nalgebra::DVector::from_iterator(
        k,
        eig.eigenvalues.iter().map(|&l| 1.0 / l.max(1e-24).sqrt()),
    );
    let m_inv_sqrt =
        &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let grad = (s * m_inv_sqrt) * (-scale);
    Ok(LossValue::new(LossKind::JustBalance, -trace_sqrt * scale, grad))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn loss_tv(s: &DMatrix<f64>, g: &Graph) -> Result<LossValue> {
    check_s(s, Some(g.num_nodes()))?;
    g.require_nonnegative_symmetric()?;
    let vol: f64 = g.edges().iter().map(|e| e.2).sum();
    if vol == 0.0 {
        return Err(PoolError::ZeroEdges);
    }
    let k = s.ncols();
    let mut value = 0.0;
    let mut grad = DMatrix::zeros(s.nrows(), k);
    let c = 1.0 / (2.0 * vol);
    for &(i, j, w) in g.edges() {
        for col in 0..k {
            let diff = s[(i, col)] - s[(j, col)];
            value += w * diff.abs();
            let sg = w * sign(diff) * c;
            grad[(i, col)] += sg;
            grad[(j, col)] -= sg;
        }
    }
    Ok(LossValue::new(LossKind::Tv, value * c, grad))
}

pub fn loss_asym_balance(s: &DMatrix<f64>) -> Result<LossValue> {
    check_s(s, None)?;
    let (n, k) = s.shape();
    if k < 2 {
        return Err(PoolError::InvalidArgument("asym-balance needs K >= 2".into()));
    }
    let c = 1.0 / (n as f64 * (k - 1) as f64);
    let mut dev = 0.0;
    let mut grad = DMatrix::zeros(n, k);
    for col in 0..k {
        let column = s.column(col);
        let mean = column.mean();
        let signs: Vec<f64> = column.iter().map(|&v| sign(v - mean)).collect();
        dev += column.iter().map(|&v| (v - mean).abs()).sum::<f64>();
        let mean_sign = signs.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            grad[(i, col)] = -c * (signs[i] - mean_sign);
        }
    }
    Ok(LossValue::new(LossKind::AsymBalance, 1.0 - c * dev, grad))
}

/// `αA + (1−α)A_Δ` for the higher-order cut.
pub fn motif_adjacency(g: &Graph, alpha: f64) -> Result<CooMatrix> {
    g.require_nonnegative_symmetric()?;
    let undirected = g.edges().iter().filter(|e| e.0 < e.1).count();
    if undirected > HOSC_MAX_EDGES {
        return Err(PoolError::TooLarge {
            op: "hosc-cut",
            size: undirected,
            limit: HOSC_MAX_EDGES,
        });
    }
    let n = g.num_nodes();
    let nbrs: Vec<Vec<usize>> = (0..n)
        .map(|i| g.neighbors(i).filter(|&(j, w)| j != i && w != 0.0).map(|(j, _)| j).collect())
        .collect();
    let mut triples = Vec::with_capacity(g.num_entries());
    for &(i, j, w) in g.edges() {
        let mut tri = 0usize;
        if i != j && w != 0.0 {
            // Sorted-list intersection.
            let (a, b) = (&nbrs[i], &nbrs[j]);
            let (mut p, mut q) = (0, 0);
            while p < a.len() && q < b.len() {
                match a[p].cmp(&b[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        tri += 1;
                        p += 1;
                        q += 1;
                    }
                }
            }
        }
        triples.push((i, j, alpha * w + (1.0 - alpha) * tri as f64));
    }
    Ok(CooMatrix::from_triples(n, n, triples))
}

fn row_sums(m: &CooMatrix) -> Vec<f64> {
    let mut d = vec![0.0; m.nrows()];
    for &(i, _, v) in m.entries() {
        d[i] += v;
    }
    d
}

pub fn loss_hosc_cut(s: &DMatrix<f64>, g: &Graph, alpha: f64) -> Result<LossValue> {
    check_s(s, Some(g.num_nodes()))?;
    let m = motif_adjacency(g, alpha)?;
    let (v, grad) = ratio_cut(s, &m, &row_sums(&m))?;
    Ok(LossValue::new(LossKind::HoscCut, v, grad))
}

/// Backpropagates `∂loss/∂S` through a row-wise softmax:
/// `∂loss/∂θ_i = (diag(S_i) − S_i S_iᵀ)·∂loss/∂S_i`.
pub fn softmax_chain(grad_s: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(grad_s.shape(), s.shape(), "shape mismatch");
    let mut out = DMatrix::zeros(s.nrows(), s.ncols());
    for i in 0..s.nrows() {
        let dot: f64 = (0..s.ncols()).map(|k| s[(i, k)] * grad_s[(i, k)]).sum();
        for k in 0..s.ncols() {
            out[(i, k)] = s[(i, k)] * (grad_s[(i, k)] - dot);
        }
    }
    out
}

/// A weighted sum of loss terms, parsed from `name:weight,...`.
///
/// A weight may be omitted (`dmon-mod,dmon-collapse`) and defaults to 1.
/// The aliases `mincut`, `dmon` and `diffpool` expand to their two terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub terms: Vec<(LossKind, f64)>,
    pub hosc_alpha: f64,
}

impl ObjectiveSpec {
    pub fn new(terms: Vec<(LossKind, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(PoolError::InvalidArgument("objective needs at least one term".into()));
        }
        if terms.iter().any(|t| !t.1.is_finite()) {
            return Err(PoolError::NonFinite("objective weights"));
        }
        Ok(Self {
            terms,
            hosc_alpha: DEFAULT_HOSC_ALPHA,
        })
    }

    pub fn needs_graph_edges(&self) -> bool {
        self.terms.iter().any(|(k, _)| {
            matches!(
                k,
                LossKind::MincutCut | LossKind::DmonMod | LossKind::Tv | LossKind::HoscCut
            )
        })
    }
}

impl FromStr for ObjectiveSpec {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, weight) = match part.split_once(':') {
                Some((n, w)) => (
                    n.trim(),
                    w.trim()
                        .parse::<f64>()
                        .map_err(|_| PoolError::InvalidArgument(format!("bad weight in `{part}`")))?,
                ),
                None => (part, 1.0),
            };
            let expanded: &[LossKind] = match name {
                "mincut" => &[LossKind::MincutCut, LossKind::MincutOrtho],
                "dmon" => &[LossKind::DmonMod, LossKind::DmonCollapse],
                "diffpool" => &[LossKind::DiffLp, LossKind::DiffEnt],
                _ => &[],
            };
            if expanded.is_empty() {
                terms.push((name.parse()?, weight));
            } else {
                terms.extend(expanded.iter().map(|&k| (k, weight)));
            }
        }
        Self::new(terms)
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(k, w)| format!("{k}:{w}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Per-graph state reused across evaluations of the same objective.
#[derive(Debug)]
pub struct Objective<'g> {
    spec: ObjectiveSpec,
    graph: &'g Graph,
    motif: OnceLock<CooMatrix>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub total: f64,
    pub terms: Vec<(LossKind, f64)>,
    pub grad_s: DMatrix<f64>,
}

impl<'g> Objective<'g> {
    pub fn new(spec: ObjectiveSpec, graph: &'g Graph) -> Self {
        Self {
            spec,
            graph,
            motif: OnceLock::new(),
        }
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn term(&self, kind: LossKind, s: &DMatrix<f64>) -> Result<LossValue> {
        let g = self.graph;
        match kind {
            LossKind::MincutCut => loss_mincut_cut(s, g),
            LossKind::MincutOrtho => loss_mincut_ortho(s),
            LossKind::DmonMod => loss_dmon(s, g),
            LossKind::DmonCollapse => loss_dmon_collapse(s),
            LossKind::DiffLp => loss_diff_lp(s, g),
            LossKind::DiffEnt => loss_diff_ent(s),
            LossKind::JustBalance => loss_justbalance(s),
            LossKind::Tv => loss_tv(s, g),
            LossKind::AsymBalance => loss_asym_balance(s),
            LossKind::HoscCut => {
                check_s(s, Some(g.num_nodes()))?;
                let m = match self.motif.get() {
                    Some(m) => m,
                    None => {
                        let m = motif_adjacency(g, self.spec.hosc_alpha)?;
                        self.motif.get_or_init(|| m)
                    }
                };
                let (v, grad) = ratio_cut(s, m, &row_sums(m))?;
                Ok(LossValue::new(LossKind::HoscCut, v, grad))
            }
        }
    }

    pub fn evaluate(&self, s: &DMatrix<f64>) -> Result<Evaluation> {
        let mut total = 0.0;
        let mut terms = Vec::with_capacity(self.spec.terms.len());
        let mut grad = DMatrix::zeros(s.nrows(), s.ncols());
        for &(kind, w) in &self.spec.terms {
            let lv = self.term(kind, s)?;
            total += w * lv.value;
            grad += lv.grad_s * w;
            terms.push((kind, lv.value));
        }
        Ok(Evaluation {
            total,
            terms,
            grad_s: grad,
        })
    }
}
