//! Finite metric spaces, distortion accounting and brute-force oracles.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::Graph;
use crate::num::{self, frac_cmp, le_tol, prod_cmp, sum_cmp};

/// Default cap on the point count accepted by the brute-force oracle.
pub const ORACLE_CAP: usize = 15;

/// How inequalities are decided: with relative slack `1e-9`, or exactly on
/// the rationals denoted by the stored floats.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Arith {
    #[default]
    Float,
    Exact,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("NotSquare: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("NonFinite: entry ({i},{j}) is not a finite number")]
    NonFinite { i: usize, j: usize },
    #[error("NonZeroDiagonal: d({i},{i}) != 0")]
    NonZeroDiagonal { i: usize },
    #[error("AsymmetricMatrix: d({i},{j}) != d({j},{i})")]
    AsymmetricMatrix { i: usize, j: usize },
    #[error("NegativeDistance: d({i},{j}) < 0")]
    NegativeDistance { i: usize, j: usize },
    #[error("ZeroOffDiagonal: d({i},{j}) = 0 for distinct points")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("TriangleViolation: d({i},{k}) > d({i},{j}) + d({j},{k}) at triple ({i},{j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("LabelCountMismatch: {labels} labels for {n} points")]
    LabelCountMismatch { labels: usize, n: usize },
    #[error("DisconnectedGraph: vertex {vertex} unreachable from 0")]
    DisconnectedGraph { vertex: usize },
    #[error("SizeMismatch: {left} points vs {right} points")]
    SizeMismatch { left: usize, right: usize },
    #[error("NotBijection: map is not a bijection onto the target")]
    NotBijection,
    #[error("InstanceTooLarge: {n} points exceeds cap {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error("InvalidWeight: weight {index} is not strictly positive and finite")]
    InvalidWeight { index: usize },
    #[error("WeightLengthMismatch: {weights} weights for {n} points")]
    WeightLengthMismatch { weights: usize, n: usize },
    #[error("IndexOutOfRange: index {index} outside 0..{n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("DuplicateIndex: index {index} repeated")]
    DuplicateIndex { index: usize },
}

/// Validation switches for [`build_metric_with`].
#[derive(Clone, Copy, Debug)]
pub struct Validation {
    /// The O(n^3) triangle pass; generated instances that are metrics by
    /// construction may skip it.
    pub triangle: bool,
    pub arith: Arith,
}

impl Default for Validation {
    fn default() -> Self {
        Validation { triangle: true, arith: Arith::Float }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<f64>,
    labels: Vec<String>,
}

impl FiniteMetric {
    /// Wraps a row-major matrix the caller already knows to be a metric.
    pub fn from_trusted(n: usize, d: Vec<f64>, labels: Option<Vec<String>>) -> Self {
        debug_assert_eq!(d.len(), n * n);
        let labels = labels.unwrap_or_else(|| default_labels(n));
        FiniteMetric { n, d, labels }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn raw(&self) -> &[f64] {
        &self.d
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diam(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest nonzero distance; 0 for a single point.
    pub fn min_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n {
            for j in i + 1..self.n {
                m = m.min(self.d(i, j));
            }
        }
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    pub fn diam_of(&self, pts: &[usize]) -> f64 {
        let mut m: f64 = 0.0;
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                m = m.max(self.d(i, j));
            }
        }
        m
    }

    /// Induced submetric, keeping labels.
    pub fn restrict(&self, pts: &[usize]) -> FiniteMetric {
        let m = pts.len();
        let mut d = Vec::with_capacity(m * m);
        for &i in pts {
            for &j in pts {
                d.push(self.d(i, j));
            }
        }
        let labels = pts.iter().map(|&i| self.labels[i].clone()).collect();
        FiniteMetric { n: m, d, labels }
    }

    pub fn scaled(&self, c: f64) -> FiniteMetric {
        FiniteMetric { n: self.n, d: self.d.iter().map(|x| x * c).collect(), labels: self.labels.clone() }
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

pub fn build_metric(matrix: &[Vec<f64>], labels: Option<Vec<String>>) -> Result<FiniteMetric, MetricError> {
    build_metric_with(matrix, labels, Validation::default())
}

pub fn build_metric_with(
    matrix: &[Vec<f64>],
    labels: Option<Vec<String>>,
    opts: Validation,
) -> Result<FiniteMetric, MetricError> {
    let n = matrix.len();
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare { row, len: r.len(), n });
        }
    }
    if let Some(l) = &labels {
        if l.len() != n {
            return Err(MetricError::LabelCountMismatch { labels: l.len(), n });
        }
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let x = matrix[i][j];
            if !x.is_finite() {
                return Err(MetricError::NonFinite { i, j });
            }
            d[i * n + j] = x;
        }
    }
    for i in 0..n {
        if d[i * n + i] != 0.0 {
            return Err(MetricError::NonZeroDiagonal { i });
        }
        for j in i + 1..n {
            let (a, b) = (d[i * n + j], d[j * n + i]);
            if a < 0.0 {
                return Err(MetricError::NegativeDistance { i, j });
            }
            if b < 0.0 {
                return Err(MetricError::NegativeDistance { i: j, j: i });
            }
            let symmetric = match opts.arith {
                Arith::Exact => a == b,
                Arith::Float => num::abs(a - b) <= num::REL_TOL * a.max(b),
            };
            if !symmetric {
                return Err(MetricError::AsymmetricMatrix { i, j });
            }
            if a == 0.0 || b == 0.0 {
                return Err(MetricError::ZeroOffDiagonal { i, j });
            }
            if a != b {
                let m = 0.5 * (a + b);
                d[i * n + j] = m;
                d[j * n + i] = m;
            }
        }
    }
    let metric = FiniteMetric::from_trusted(n, d, labels);
    if opts.triangle {
        if let Some((i, j, k)) = triangle_witness(&metric, opts.arith) {
            return Err(MetricError::TriangleViolation { i, j, k });
        }
    }
    Ok(metric)
}

/// First triple (in `i`, `k`, `j` order) with `d(i,k) > d(i,j) + d(j,k)`.
pub fn triangle_witness(m: &FiniteMetric, arith: Arith) -> Option<(usize, usize, usize)> {
    let n = m.n();
    for i in 0..n {
        for k in i + 1..n {
            let dik = m.d(i, k);
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let (a, b) = (m.d(i, j), m.d(j, k));
                let bad = match arith {
                    Arith::Exact => sum_cmp(a, b, dik) == Ordering::Less,
                    Arith::Float => dik > (a + b) * (1.0 + num::REL_TOL),
                };
                if bad {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// All-pairs shortest paths; unit edge lengths unless `edge_weights` is
/// given (one positive weight per edge of `g`, in edge-list order).
pub fn shortest_path_metric(g: &Graph, edge_weights: Option<&[f64]>) -> Result<FiniteMetric, MetricError> {
    let n = g.n();
    let d = match edge_weights {
        None => {
            let mut d = vec![0.0; n * n];
            for s in 0..n {
                let dist = g.bfs(s);
                for (t, &x) in dist.iter().enumerate() {
                    if x == usize::MAX {
                        return Err(MetricError::DisconnectedGraph { vertex: t });
                    }
                    d[s * n + t] = x as f64;
                }
            }
            d
        }
        Some(w) => {
            if w.len() != g.edges().len() {
                return Err(MetricError::WeightLengthMismatch { weights: w.len(), n: g.edges().len() });
            }
            let mut d = vec![f64::INFINITY; n * n];
            for i in 0..n {
                d[i * n + i] = 0.0;
            }
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                if !(w[e] > 0.0) || !w[e].is_finite() {
                    return Err(MetricError::InvalidWeight { index: e });
                }
                if u != v && w[e] < d[u * n + v] {
                    d[u * n + v] = w[e];
                    d[v * n + u] = w[e];
                }
            }
            floyd_warshall(n, &mut d);
            if let Some(t) = (0..n).find(|&t| !d[t].is_finite()) {
                return Err(MetricError::DisconnectedGraph { vertex: t });
            }
            d
        }
    };
    Ok(FiniteMetric::from_trusted(n, d, None))
}

pub(crate) fn floyd_warshall(n: usize, d: &mut [f64]) {
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let alt = dik + d[k * n + j];
                if alt < d[i * n + j] {
                    d[i * n + j] = alt;
                }
            }
        }
    }
}

/// diam / min distance, with the convention 1 for a single point.
pub fn aspect_ratio(x: &FiniteMetric) -> f64 {
    if x.n() <= 1 {
        return 1.0;
    }
    x.diam() / x.min_distance()
}

pub fn aspect_ratio_of(x: &FiniteMetric, pts: &[usize]) -> f64 {
    if pts.len() <= 1 {
        return 1.0;
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (a, &i) in pts.iter().enumerate() {
        for &j in &pts[a + 1..] {
            lo = lo.min(x.d(i, j));
            hi = hi.max(x.d(i, j));
        }
    }
    hi / lo
}

/// One of the two extremal pairs of a distortion computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub pair: (usize, usize),
    pub dx: f64,
    pub dy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingReport {
    /// max d_Y / d_X
    pub expansion: f64,
    /// max d_X / d_Y
    pub contraction: f64,
    pub distortion: f64,
    pub expansion_witness: Option<Witness>,
    pub contraction_witness: Option<Witness>,
}

impl EmbeddingReport {
    pub fn identity() -> Self {
        EmbeddingReport {
            expansion: 1.0,
            contraction: 1.0,
            distortion: 1.0,
            expansion_witness: None,
            contraction_witness: None,
        }
    }

    /// `distortion <= bound`, exactly on the witness pairs or with slack.
    pub fn within(&self, bound: f64, arith: Arith) -> bool {
        match arith {
            Arith::Float => le_tol(self.distortion, bound),
            Arith::Exact => match (self.expansion_witness, self.contraction_witness) {
                (Some(e), Some(c)) => crate::exact::ratio_product_le(e.dy, e.dx, c.dx, c.dy, bound),
                _ => 1.0 <= bound,
            },
        }
    }

    /// Noncontractive (up to slack) in the orientation X -> Y.
    pub fn noncontractive(&self, arith: Arith) -> bool {
        match (arith, self.contraction_witness) {
            (Arith::Exact, Some(c)) => c.dx <= c.dy,
            _ => le_tol(self.contraction, 1.0),
        }
    }
}

/// Distortion of `f: X -> Y` given as `f[i]` = image index of point `i`.
pub fn distortion(x: &FiniteMetric, y: &FiniteMetric, f: &[usize]) -> Result<EmbeddingReport, MetricError> {
    if x.n() != y.n() {
        return Err(MetricError::SizeMismatch { left: x.n(), right: y.n() });
    }
    if f.len() != x.n() {
        return Err(MetricError::NotBijection);
    }
    let mut seen = vec![false; y.n()];
    for &t in f {
        if t >= y.n() || seen[t] {
            return Err(MetricError::NotBijection);
        }
        seen[t] = true;
    }
    Ok(distortion_by(x.n(), |i, j| x.d(i, j), |i, j| y.d(f[i], f[j])))
}

/// Distortion between two distance functions on the same index set.
pub fn distortion_by(
    n: usize,
    dx: impl Fn(usize, usize) -> f64,
    dy: impl Fn(usize, usize) -> f64,
) -> EmbeddingReport {
    let mut exp: Option<Witness> = None;
    let mut con: Option<Witness> = None;
    for i in 0..n {
        for j in i + 1..n {
            let w = Witness { pair: (i, j), dx: dx(i, j), dy: dy(i, j) };
            match exp {
                Some(e) if frac_cmp(w.dy, w.dx, e.dy, e.dx) != Ordering::Greater => {}
                _ => exp = Some(w),
            }
            match con {
                Some(c) if frac_cmp(w.dx, w.dy, c.dx, c.dy) != Ordering::Greater => {}
                _ => con = Some(w),
            }
        }
    }
    match (exp, con) {
        (Some(e), Some(c)) => {
            let expansion = e.dy / e.dx;
            let contraction = c.dx / c.dy;
            EmbeddingReport {
                expansion,
                contraction,
                distortion: expansion * contraction,
                expansion_witness: Some(e),
                contraction_witness: Some(c),
            }
        }
        _ => EmbeddingReport::identity(),
    }
}

/// Edges of a minimum spanning tree as `(length, u, v)`, ascending.
pub fn minimum_spanning_edges(x: &FiniteMetric) -> Vec<(f64, usize, usize)> {
    let n = x.n();
    if n == 0 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    in_tree[0] = true;
    for j in 1..n {
        best[j] = x.d(0, j);
    }
    for _ in 1..n {
        let mut v = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (v == usize::MAX || best[j] < best[v]) {
                v = j;
            }
        }
        in_tree[v] = true;
        edges.push((best[v], parent[v].min(v), parent[v].max(v)));
        for j in 0..n {
            if !in_tree[j] && x.d(v, j) < best[j] {
                best[j] = x.d(v, j);
                parent[j] = v;
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    edges
}

/// The pointwise-maximal ultrametric below `x` (single linkage) and the
/// optimal distortion `c_um = max d/u` of `x` into any ultrametric.
pub fn subdominant_ultrametric(x: &FiniteMetric) -> (FiniteMetric, f64) {
    let n = x.n();
    let mut u = vec![0.0; n * n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut owner: Vec<usize> = (0..n).collect();
    for (len, a, b) in minimum_spanning_edges(x) {
        let (ra, rb) = (owner[a], owner[b]);
        let moved = core::mem::take(&mut members[rb]);
        for &p in &members[ra] {
            for &q in &moved {
                u[p * n + q] = len;
                u[q * n + p] = len;
            }
        }
        for &q in &moved {
            owner[q] = ra;
        }
        members[ra].extend(moved);
    }
    let um = FiniteMetric::from_trusted(n, u, Some(x.labels().to_vec()));
    let c = distortion_by(n, |i, j| um.d(i, j), |i, j| x.d(i, j)).expansion;
    (um, if n <= 1 { 1.0 } else { c })
}

/// `c_um(S) <= alpha` for the subspace `pts`.
pub fn ultrametric_within(x: &FiniteMetric, pts: &[usize], alpha: f64, arith: Arith) -> bool {
    if pts.len() <= 2 {
        return alpha >= 1.0;
    }
    let sub = x.restrict(pts);
    let (u, c) = subdominant_ultrametric(&sub);
    match arith {
        Arith::Float => le_tol(c, alpha),
        Arith::Exact => {
            let m = sub.n();
            (0..m).all(|i| (i + 1..m).all(|j| prod_cmp(alpha, u.d(i, j), sub.d(i, j)) != Ordering::Less))
        }
    }
}

/// `Phi(S) <= alpha` for the subspace `pts`.
pub fn aspect_within(x: &FiniteMetric, pts: &[usize], alpha: f64, arith: Arith) -> bool {
    if pts.len() <= 1 {
        return alpha >= 1.0;
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (a, &i) in pts.iter().enumerate() {
        for &j in &pts[a + 1..] {
            lo = lo.min(x.d(i, j));
            hi = hi.max(x.d(i, j));
        }
    }
    match arith {
        Arith::Float => le_tol(hi / lo, alpha),
        Arith::Exact => prod_cmp(alpha, lo, hi) != Ordering::Less,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Ultrametric,
    Equilateral,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSubset {
    indices: Vec<usize>,
}

impl PointSubset {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self, MetricError> {
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(MetricError::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(MetricError::DuplicateIndex { index: i });
            }
            seen[i] = true;
        }
        Ok(PointSubset { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn induced(&self, x: &FiniteMetric) -> FiniteMetric {
        x.restrict(&self.indices)
    }
}

/// Largest subset whose optimal distortion into `target` is at most
/// `alpha`; among maximum-cardinality answers the lexicographically
/// smallest index set wins.
pub fn exact_ramsey_oracle(
    x: &FiniteMetric,
    alpha: f64,
    target: Target,
    cap: usize,
    arith: Arith,
) -> Result<PointSubset, MetricError> {
    let n = x.n();
    if n > cap {
        return Err(MetricError::InstanceTooLarge { n, cap });
    }
    for size in (1..=n).rev() {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let ok = match target {
                Target::Ultrametric => ultrametric_within(x, &combo, alpha, arith),
                Target::Equilateral => aspect_within(x, &combo, alpha, arith),
            };
            if ok {
                return Ok(PointSubset { indices: combo });
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    Ok(PointSubset { indices: Vec::new() })
}

/// Advances to the next k-combination of 0..n in lexicographic order.
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMetric {
    pub base: FiniteMetric,
    w: Vec<f64>,
}

impl WeightedMetric {
    pub fn new(base: FiniteMetric, w: Vec<f64>) -> Result<Self, MetricError> {
        if w.len() != base.n() {
            return Err(MetricError::WeightLengthMismatch { weights: w.len(), n: base.n() });
        }
        if let Some(index) = w.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(MetricError::InvalidWeight { index });
        }
        Ok(WeightedMetric { base, w })
    }

    pub fn uniform(base: FiniteMetric) -> Self {
        let n = base.n();
        WeightedMetric { base, w: vec![1.0; n] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }
}
