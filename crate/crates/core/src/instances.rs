//! Seeded generators for graphs, cube codes and finite metrics.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` with
//! `set_stream(i)` selecting the `i`-th independent stream. Every
//! generator is a pure function of its parameters and seed.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{complete_graph, cycle_graph, hypercube, path_graph, Graph};
use crate::hst::{metric_composition, CompositionSpec, HstError};
use crate::metric::{build_metric, distortion_by, shortest_path_metric, EmbeddingReport, FiniteMetric, MetricError, PointSubset};
use crate::num;

/// Name of the generator recorded next to every seed.
pub const GENERATOR: &str = "ChaCha8";

/// Largest cube dimension whose dense metric is materialized.
pub const MAX_CUBE_DIM: u32 = 12;

/// Pairings tried by the configuration model before giving up.
pub const REJECTION_LIMIT: usize = 200_000;

/// Fresh samples tried by [`gen_high_girth_dense`].
pub const RETRY_LIMIT: u64 = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("DTooLarge: dimension {d} outside 1..={max}")]
    DTooLarge { d: u32, max: u32 },
    #[error("InfeasibleDegree: no simple {d}-regular graph on {n} vertices")]
    InfeasibleDegree { n: usize, d: usize },
    #[error("RejectionLimit: no acceptable pairing in {attempts} attempts")]
    RejectionLimit { attempts: usize },
    #[error("RetryLimitExceeded: {attempts} samples failed to keep half the vertices")]
    RetryLimitExceeded { attempts: u64 },
    #[error("TooFewVertices: expected {expected} short cycles on {n} vertices, need fewer than n/4")]
    TooFewVertices { n: usize, expected: f64 },
    #[error("MissingParam: family needs `{name}`")]
    MissingParam { name: &'static str },
    #[error("InvalidParam: `{name}` = {value} is out of range")]
    InvalidParam { name: &'static str, value: f64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Hst(#[from] HstError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Hypercube,
    RandomRegular,
    HighGirthDense,
    GvCode,
    Cycle,
    Path,
    Complete,
    Equilateral,
    RandomMetric,
    Composed,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Hypercube => "hypercube",
            Family::RandomRegular => "random_regular",
            Family::HighGirthDense => "high_girth_dense",
            Family::GvCode => "gv_code",
            Family::Cycle => "cycle",
            Family::Path => "path",
            Family::Complete => "complete",
            Family::Equilateral => "equilateral",
            Family::RandomMetric => "random_metric",
            Family::Composed => "composed",
        }
    }
}

/// Family parameters; which ones are read depends on the family.
///
/// | family | fields |
/// |---|---|
/// | hypercube | `d` |
/// | random_regular | `n`, `d`, optional `girth` (minimum) |
/// | high_girth_dense | `n`, `girth` |
/// | gv_code | `d`, `min_dist` |
/// | cycle, path, complete, equilateral, random_metric | `n` |
/// | composed | `n` (outer), `inner`, `beta` |
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstanceParams {
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub n: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub d: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub girth: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub min_dist: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub inner: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstanceSpec {
    pub family: Family,
    #[cfg_attr(feature = "serde", serde(default))]
    pub params: InstanceParams,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family, params: InstanceParams, seed: u64) -> Self {
        InstanceSpec { family, params, seed }
    }

    /// Spec for a single-size family.
    pub fn sized(family: Family, n: usize, seed: u64) -> Self {
        InstanceSpec { family, params: InstanceParams { n: Some(n), ..InstanceParams::default() }, seed }
    }
}

/// A generated instance. Graph families carry their graph, and the
/// shortest-path metric when the graph is connected; `gv_code` carries the
/// code words (as integers whose bits are coordinates) and their Hamming
/// metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub graph: Option<Graph>,
    pub metric: Option<FiniteMetric>,
    pub words: Option<Vec<usize>>,
}

/// The generator stream `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance, InstanceError> {
    let p = &spec.params;
    let need = |v: Option<usize>, name: &'static str| v.ok_or(InstanceError::MissingParam { name });
    let (graph, metric, words) = match spec.family {
        Family::Hypercube => {
            let d = need(p.d, "d")?;
            let (g, m) = gen_hypercube(d as u32)?;
            (Some(g), Some(m), None)
        }
        Family::RandomRegular => {
            let g = gen_random_regular_girth(need(p.n, "n")?, need(p.d, "d")?, p.girth.unwrap_or(0), spec.seed)?;
            let m = shortest_path_metric(&g, None).ok();
            (Some(g), m, None)
        }
        Family::HighGirthDense => {
            let g = gen_high_girth_dense(need(p.n, "n")?, need(p.girth, "girth")?, spec.seed)?;
            let m = shortest_path_metric(&g, None).ok();
            (Some(g), m, None)
        }
        Family::GvCode => {
            let d = need(p.d, "d")?;
            let code = gv_code(d as u32, need(p.min_dist, "min_dist")? as u32)?;
            let words = code.indices().to_vec();
            (None, Some(code_metric(&words, false)), Some(words))
        }
        _ => (None, Some(gen_misc(spec.family, p, spec.seed)?), None),
    };
    Ok(Instance { spec: spec.clone(), graph, metric, words })
}

/// The `d`-cube with its Hamming metric.
pub fn gen_hypercube(d: u32) -> Result<(Graph, FiniteMetric), InstanceError> {
    if d == 0 || d > MAX_CUBE_DIM {
        return Err(InstanceError::DTooLarge { d, max: MAX_CUBE_DIM });
    }
    let words: Vec<usize> = (0..1usize << d).collect();
    Ok((hypercube(d), code_metric(&words, false)))
}

/// Hamming (or, with `sqrt`, Euclidean `√Hamming`) distances between words.
pub fn code_metric(words: &[usize], sqrt: bool) -> FiniteMetric {
    let n = words.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let h = (words[i] ^ words[j]).count_ones() as f64;
            d[i * n + j] = if sqrt { num::sqrt(h) } else { h };
        }
    }
    FiniteMetric::from_trusted(n, d, None)
}

/// A uniformly random simple `d`-regular graph on `n` vertices by the
/// configuration model, rejecting pairings with loops or multi-edges.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, InstanceError> {
    gen_random_regular_girth(n, d, 0, seed)
}

/// As [`gen_random_regular`], also rejecting samples of girth below
/// `min_girth`.
pub fn gen_random_regular_girth(n: usize, d: usize, min_girth: usize, seed: u64) -> Result<Graph, InstanceError> {
    if d < 3 || d >= n || (n * d) % 2 == 1 {
        return Err(InstanceError::InfeasibleDegree { n, d });
    }
    let mut r = rng(seed, 0);
    let mut stubs: Vec<usize> = (0..n * d).map(|s| s / d).collect();
    let mut seen = vec![false; n * n];
    for _ in 0..REJECTION_LIMIT {
        stubs.sort_unstable();
        stubs.shuffle(&mut r);
        seen.iter_mut().for_each(|s| *s = false);
        let mut edges = Vec::with_capacity(n * d / 2);
        let simple = stubs.chunks(2).all(|pair| {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            let fresh = a != b && !seen[a * n + b];
            seen[a * n + b] = true;
            edges.push((a, b));
            fresh
        });
        if !simple {
            continue;
        }
        edges.sort_unstable();
        let g = Graph::from_edges(n, &edges);
        if min_girth > 3 && g.girth().is_some_and(|girth| girth < min_girth) {
            continue;
        }
        return Ok(g);
    }
    Err(InstanceError::RejectionLimit { attempts: REJECTION_LIMIT })
}

/// `Σ_{3 ≤ k < g} (Np)^k / (2k)`, an upper bound on the expected number of
/// cycles shorter than `g` in `G(N, p)`.
pub fn expected_short_cycles(n: usize, p: f64, g: usize) -> f64 {
    (3..g).map(|k| num::pow(n as f64 * p, k as f64) / (2.0 * k as f64)).sum()
}

/// Samples `G(N, p)` with `p = 2N^{-1+1/(2g)}` and deletes a vertex from
/// every cycle shorter than `g`; a sample losing more than half its
/// vertices is redrawn from the next stream. The survivors are relabelled
/// in increasing order and the girth is verified.
pub fn gen_high_girth_dense(n: usize, g: usize, seed: u64) -> Result<Graph, InstanceError> {
    if g < 3 {
        return Err(InstanceError::InvalidParam { name: "girth", value: g as f64 });
    }
    let eta = 1.0 / (4.0 * g as f64);
    let p = (2.0 * num::pow(n as f64, -1.0 + 2.0 * eta)).min(1.0);
    let expected = expected_short_cycles(n, p, g);
    if !(4.0 * expected < n as f64) {
        return Err(InstanceError::TooFewVertices { n, expected });
    }
    for attempt in 0..RETRY_LIMIT {
        let mut r = rng(seed, attempt);
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if r.gen_bool(p) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut alive = vec![true; n];
        let mut removed = 0;
        while let Some(v) = short_cycle_vertex(&adj, &alive, g) {
            alive[v] = false;
            removed += 1;
            if 2 * removed > n {
                break;
            }
        }
        if 2 * removed > n {
            continue;
        }
        let ids: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        let mut index = vec![usize::MAX; n];
        for (k, &v) in ids.iter().enumerate() {
            index[v] = k;
        }
        let mut edges = Vec::new();
        for &u in &ids {
            for &v in &adj[u] {
                if u < v && alive[v] {
                    edges.push((index[u], index[v]));
                }
            }
        }
        let out = Graph::from_edges(ids.len(), &edges);
        assert!(out.girth().map_or(true, |girth| girth >= g), "pruned sample keeps a short cycle");
        return Ok(out);
    }
    Err(InstanceError::RetryLimitExceeded { attempts: RETRY_LIMIT })
}

/// A vertex on some cycle of length `< g` among `alive` vertices: an
/// endpoint of the first non-tree edge closing such a cycle in a BFS.
fn short_cycle_vertex(adj: &[Vec<usize>], alive: &[bool], g: usize) -> Option<usize> {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = alloc::collections::VecDeque::new();
    for s in (0..n).filter(|&s| alive[s]) {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= g {
                break;
            }
            for &v in adj[u].iter().filter(|&&v| alive[v]) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v && dist[u] + dist[v] + 1 < g {
                    return Some(u);
                }
            }
        }
    }
    None
}

/// `2^d / Σ_{m ≤ r} C(d, m)` as an exact fraction `(numerator, denominator)`.
pub fn gv_bound(d: u32, r: u32) -> (u64, u64) {
    let mut sum = 0u64;
    let mut c = 1u64;
    for m in 0..=r.min(d) as u64 {
        sum += c;
        c = c * (d as u64 - m) / (m + 1);
    }
    (1u64 << d, sum)
}

/// Greedy lexicographic code: scan `0..2^d` in order and keep every word
/// at Hamming distance at least `min_dist` from all words kept so far.
pub fn gv_code(d: u32, min_dist: u32) -> Result<PointSubset, InstanceError> {
    if d == 0 || d > 16 {
        return Err(InstanceError::DTooLarge { d, max: 16 });
    }
    if min_dist == 0 || min_dist > d {
        return Err(InstanceError::InvalidParam { name: "min_dist", value: min_dist as f64 });
    }
    let mut code: Vec<usize> = Vec::new();
    for w in 0..1usize << d {
        if code.iter().all(|&c| (c ^ w).count_ones() >= min_dist) {
            code.push(w);
        }
    }
    Ok(PointSubset::new(code, 1 << d)?)
}

/// Distortion of the coordinate embedding of `(words, Hamming)` into `ℓ₂`.
pub fn code_embedding_report(words: &[usize]) -> EmbeddingReport {
    let h = |i: usize, j: usize| (words[i] ^ words[j]).count_ones() as f64;
    distortion_by(words.len(), h, |i, j| num::sqrt(h(i, j)))
}

/// Metric families without a graph.
pub fn gen_misc(family: Family, p: &InstanceParams, seed: u64) -> Result<FiniteMetric, InstanceError> {
    let n = p.n.ok_or(InstanceError::MissingParam { name: "n" })?;
    if n == 0 {
        return Err(InstanceError::InvalidParam { name: "n", value: 0.0 });
    }
    let connected = |g: Graph| shortest_path_metric(&g, None).map_err(InstanceError::from);
    match family {
        Family::Cycle if n >= 3 => connected(cycle_graph(n)),
        Family::Cycle => Err(InstanceError::InvalidParam { name: "n", value: n as f64 }),
        Family::Path => connected(path_graph(n)),
        Family::Complete | Family::Equilateral => connected(complete_graph(n)),
        Family::RandomMetric => Ok(random_metric(n, seed, 0)),
        Family::Composed => {
            let inner = p.inner.ok_or(InstanceError::MissingParam { name: "inner" })?;
            let beta = p.beta.ok_or(InstanceError::MissingParam { name: "beta" })?;
            if inner == 0 {
                return Err(InstanceError::InvalidParam { name: "inner", value: 0.0 });
            }
            let spec = CompositionSpec {
                outer: random_metric(n, seed, 0),
                blocks: (0..n as u64).map(|b| random_metric(inner, seed, b + 1)).collect(),
                beta,
            };
            Ok(metric_composition(&spec)?)
        }
        other => Err(InstanceError::InvalidParam { name: other.name(), value: n as f64 }),
    }
}

/// Shortest-path closure of the complete graph with independent edge
/// lengths `2^U`, `U` uniform on `[0, 10)`, rounded to multiples of
/// `2^-20` so that every path sum is exact and the closure is a metric
/// under exact comparisons too.
pub fn random_metric(n: usize, seed: u64, stream: u64) -> FiniteMetric {
    const GRID: f64 = (1u64 << 20) as f64;
    let mut r = rng(seed, stream);
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = libm::round(num::exp2(r.gen_range(0.0..10.0)) * GRID) / GRID;
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    let mut flat: Vec<f64> = rows.concat();
    crate::metric::floyd_warshall(n, &mut flat);
    let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).map(|c| c.to_vec()).collect();
    build_metric(&rows, None).expect("shortest-path closures are metrics")
}
