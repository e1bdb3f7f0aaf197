//! Stationary distributions and suspended-animation depth limits.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::eigen::{eigen_extremes, SpectrumSummary};
use super::SpectralError;
use crate::graph::{
    is_bipartite, is_connected, lazy_walk_matrix, normalized_adjacency, random_walk_matrix,
    symmetric_walk_matrix, walk_degrees, Graph,
};
use crate::sparse::{spmm, SparseMatrix};
use crate::Matrix;

/// `λ_max` at or above `1 - UNIT_TOL` is treated as exactly one.
const UNIT_TOL: f64 = 1e-12;
/// `λ_max` within this distance of one is flagged as nearly reducible or
/// nearly periodic.
const NEAR_UNIT: f64 = 1e-6;
const COLUMN_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// Symmetric `D̃^{-1/2} Ã D̃^{-1/2}`.
    Normalized,
    /// Column-stochastic `Ã D̃^{-1}`.
    RandomWalk,
    /// `½ Â + ½ I`.
    Lazy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    pub fn min(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }
}

/// Depth bound: a positive integer or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitDepth {
    Finite(usize),
    Infinite,
}

impl LimitDepth {
    pub fn finite(self) -> Option<usize> {
        match self {
            LimitDepth::Finite(d) => Some(d),
            LimitDepth::Infinite => None,
        }
    }

    /// `true` when `depth` does not exceed this bound.
    pub fn admits(self, depth: usize) -> bool {
        match self {
            LimitDepth::Finite(d) => depth <= d,
            LimitDepth::Infinite => true,
        }
    }
}

impl std::fmt::Display for LimitDepth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitDepth::Finite(d) => write!(f, "{d}"),
            LimitDepth::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for LimitDepth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LimitDepth::Finite(d) => s.serialize_u64(*d as u64),
            LimitDepth::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for LimitDepth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(LimitDepth::Finite(v as usize)),
            Raw::Str(s) if s == "inf" => Ok(LimitDepth::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected an integer or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Stationary distribution of the chain on a connected graph.
///
/// For the random walk this is `π(i) = d̃(i) / Σ d̃`, unique whenever the graph
/// is connected (a bipartite walk has the same unique π, it just never
/// converges to it). For the symmetric kinds the uniform vector `1/n` is
/// returned: the distribution the symmetric operator is commonly credited
/// with. Its true dominant eigenvector is `∝ √d̃`; see
/// [`symmetric_fixed_point`] for the limit the iteration actually reaches.
pub fn stationary_distribution(
    g: &Graph,
    kind: OperatorKind,
    self_loops: bool,
) -> Result<StationaryDistribution, SpectralError> {
    if !is_connected(g) {
        return Err(SpectralError::NoUniqueStationary("graph is not irreducible"));
    }
    let n = g.node_count();
    let pi = match kind {
        OperatorKind::RandomWalk => {
            let deg = walk_degrees(g, self_loops)?;
            let total: usize = deg.iter().sum();
            deg.iter().map(|&d| d as f64 / total as f64).collect()
        }
        OperatorKind::Normalized | OperatorKind::Lazy => vec![1.0 / n as f64; n],
    };
    Ok(StationaryDistribution { pi })
}

fn check_epsilon(epsilon: f64) -> Result<(), SpectralError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(SpectralError::Epsilon(epsilon))
    }
}

/// Smallest `t ≥ 1` with `rate^t ≤ ε/√n`.
fn closed_form_depth(rate: f64, n: usize, epsilon: f64) -> LimitDepth {
    if rate >= 1.0 - UNIT_TOL {
        return LimitDepth::Infinite;
    }
    if rate <= 0.0 {
        return LimitDepth::Finite(1);
    }
    let target = epsilon / (n as f64).sqrt();
    let t = (target.ln() / rate.ln()).ceil();
    LimitDepth::Finite((t as usize).max(1))
}

/// Closed-form depth after which the iterated operator is within `ε` (L1) of
/// its limit: `⌈log(ε/√n) / log λ_max⌉`, unbounded when `λ_max = 1`.
pub fn theoretical_limit_bound(
    s: &SpectrumSummary,
    pi: &StationaryDistribution,
    epsilon: f64,
) -> Result<LimitDepth, SpectralError> {
    check_epsilon(epsilon)?;
    Ok(closed_form_depth(s.lambda_max, pi.len(), epsilon))
}

/// Same bound for the lazy operator, whose spectrum is nonnegative so that
/// `λ2` alone sets the rate. `s` must be the lazy operator's spectrum.
pub fn lazy_limit_bound(
    s: &SpectrumSummary,
    pi: &StationaryDistribution,
    epsilon: f64,
) -> Result<LimitDepth, SpectralError> {
    check_epsilon(epsilon)?;
    Ok(closed_form_depth(s.lambda2, pi.len(), epsilon))
}

/// `Π* = [π, π, …, π]` with `cols` columns.
pub fn broadcast_stationary(pi: &StationaryDistribution, cols: usize) -> Matrix {
    Matrix::from_shape_fn((pi.len(), cols), |(i, _)| pi.pi[i])
}

/// Matrix 1-norm of `a - b`: the largest column L1 distance. Each column is
/// one distribution pushed through the chain, so this is the worst-case
/// per-distribution distance.
pub fn matrix_l1_distance(a: &Matrix, b: &Matrix) -> f64 {
    (a - b)
        .columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Limit of `M^t X` as `t → ∞` for the symmetric normalized operator (and its
/// lazy version): on every connected component `c`, the projection onto
/// `v_c ∝ √d̃` restricted to `c`. Requires every component to be aperiodic,
/// which self-loops guarantee.
pub fn symmetric_fixed_point(g: &Graph, x: &Matrix, self_loops: bool) -> Result<Matrix, SpectralError> {
    let n = g.node_count();
    if x.nrows() != n {
        return Err(SpectralError::Shape(format!(
            "{} nodes against features {:?}",
            n,
            x.dim()
        )));
    }
    let deg = walk_degrees(g, self_loops)?;
    let comp = g.components();
    let count = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut mass = vec![0.0; count];
    for (i, &c) in comp.iter().enumerate() {
        mass[c] += deg[i] as f64;
    }
    let v: Vec<f64> = (0..n)
        .map(|i| (deg[i] as f64 / mass[comp[i]]).sqrt())
        .collect();
    let mut coef = Matrix::zeros((count, x.ncols()));
    for i in 0..n {
        coef.row_mut(comp[i]).scaled_add(v[i], &x.row(i));
    }
    Ok(Matrix::from_shape_fn(x.dim(), |(i, j)| v[i] * coef[[comp[i], j]]))
}

fn check_column_normalized(x: &Matrix) -> Result<(), SpectralError> {
    for (column, c) in x.columns().into_iter().enumerate() {
        let sum = c.sum();
        if (sum - 1.0).abs() > COLUMN_SUM_TOL {
            return Err(SpectralError::NotColumnNormalized { column, sum });
        }
    }
    Ok(())
}

/// Smallest `k ≤ max_iter` with `‖M^k X - Π*‖₁ ≤ ε`, where `Π*` broadcasts
/// `pi` across the columns of `x`. `None` when the iteration never gets there.
pub fn empirical_animation_limit(
    m: &SparseMatrix,
    x: &Matrix,
    pi: &StationaryDistribution,
    epsilon: f64,
    max_iter: usize,
) -> Result<Option<usize>, SpectralError> {
    if pi.len() != x.nrows() {
        return Err(SpectralError::Shape(format!(
            "stationary vector of length {} against features {:?}",
            pi.len(),
            x.dim()
        )));
    }
    let target = broadcast_stationary(pi, x.ncols());
    empirical_limit_to(m, x, &target, epsilon, max_iter)
}

/// As [`empirical_animation_limit`] with an explicit limit matrix.
pub fn empirical_limit_to(
    m: &SparseMatrix,
    x: &Matrix,
    target: &Matrix,
    epsilon: f64,
    max_iter: usize,
) -> Result<Option<usize>, SpectralError> {
    check_epsilon(epsilon)?;
    if m.rows() != m.cols() || m.cols() != x.nrows() || target.dim() != x.dim() {
        return Err(SpectralError::Shape(format!(
            "operator {:?}, features {:?}, limit {:?}",
            m.shape(),
            x.dim(),
            target.dim()
        )));
    }
    check_column_normalized(x)?;
    let mut t = x.clone();
    for k in 1..=max_iter {
        t = spmm(m, &t)?;
        if matrix_l1_distance(&t, target) <= epsilon {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub kind: OperatorKind,
    /// Only meaningful for the random walk; the symmetric kinds always carry
    /// self-loops.
    pub self_loops: bool,
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            kind: OperatorKind::Normalized,
            self_loops: true,
            epsilon: 1e-4,
            max_iter: 10_000,
        }
    }
}

/// Full depth-limit analysis of one operator on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub n: usize,
    pub edge_count: usize,
    #[serde(flatten)]
    pub spectrum: SpectrumSummary,
    pub pi_min: Option<f64>,
    pub epsilon: f64,
    pub bound_depth: LimitDepth,
    pub empirical_depth: Option<usize>,
    pub operator_kind: OperatorKind,
    pub warning: Option<String>,
}

/// Builds the chosen operator, its spectrum and closed-form bound, and pushes
/// the column-normalized probe features `x` through it until they land within
/// `ε` of the limit.
pub fn analyze_limit(
    g: &Graph,
    x: &Matrix,
    opts: &LimitOptions,
) -> Result<LimitReport, SpectralError> {
    check_epsilon(opts.epsilon)?;
    let n = g.node_count();
    let mut warnings = Vec::new();
    let connected = is_connected(g);
    if !connected {
        let comps = g.components().into_iter().max().map_or(0, |m| m + 1);
        warnings.push(format!("graph is disconnected ({comps} components)"));
    }
    let self_loops = opts.kind != OperatorKind::RandomWalk || opts.self_loops;
    if !self_loops && is_bipartite(g) {
        warnings.push("graph is bipartite and the walk has no self-loops".to_owned());
    }

    let (operator, spectral_form) = match opts.kind {
        OperatorKind::Normalized => {
            let a = normalized_adjacency(g);
            (a.clone(), a)
        }
        OperatorKind::Lazy => {
            let l = lazy_walk_matrix(&normalized_adjacency(g))?;
            (l.clone(), l)
        }
        OperatorKind::RandomWalk => {
            if !self_loops && g.degrees().contains(&0) {
                // No transition out of an isolated node: report the spectrum
                // of the symmetric form with self-loops instead of failing.
                warnings.push("isolated nodes present; walk is undefined without self-loops".to_owned());
                let a = normalized_adjacency(g);
                (a.clone(), a)
            } else {
                (
                    random_walk_matrix(g, self_loops)?,
                    symmetric_walk_matrix(g, self_loops)?,
                )
            }
        }
    };
    let spectrum = eigen_extremes(&spectral_form)?;
    let rate = match opts.kind {
        OperatorKind::Lazy => spectrum.lambda2,
        _ => spectrum.lambda_max,
    };
    if (1.0 - NEAR_UNIT..1.0 - UNIT_TOL).contains(&rate) {
        warnings.push(format!(
            "lambda_max = {rate} is within {NEAR_UNIT} of 1; the bound is very loose"
        ));
    }
    let bound_depth = closed_form_depth(rate, n, opts.epsilon);

    let pi = stationary_distribution(g, opts.kind, self_loops).ok();
    let empirical_depth = match opts.kind {
        OperatorKind::Normalized | OperatorKind::Lazy => {
            let target = symmetric_fixed_point(g, x, true)?;
            empirical_limit_to(&operator, x, &target, opts.epsilon, opts.max_iter)?
        }
        OperatorKind::RandomWalk => match &pi {
            Some(pi) => empirical_animation_limit(&operator, x, pi, opts.epsilon, opts.max_iter)?,
            None => None,
        },
    };

    Ok(LimitReport {
        n,
        edge_count: g.edge_count(),
        spectrum,
        pi_min: pi.as_ref().map(StationaryDistribution::min),
        epsilon: opts.epsilon,
        bound_depth,
        empirical_depth,
        operator_kind: opts.kind,
        warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
    })
}
