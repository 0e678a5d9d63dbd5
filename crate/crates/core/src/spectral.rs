//! Spectra, mixing, Poincaré certificates and random-walk drift on regular graphs.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::binomial;
use crate::graph::Graph;
use crate::num::{self, le_tol};

/// Largest graph handed to the exhaustive mixing computation.
pub const MIXING_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("NotRegular: the graph has vertices of different degrees")]
    NotRegular,
    #[error("InstanceTooLarge: {n} vertices exceed the cap of {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error("SubsetTooSmall: |B| = {size} is below 8 gamma_+ |V| = {required}")]
    SubsetTooSmall { size: usize, required: f64 },
    #[error("TOutOfRange: t = {t} is outside 1..={max}")]
    TOutOfRange { t: usize, max: usize },
    #[error("OutOfRange: need 0 <= k, x <= d, got d = {d}, k = {k}, x = {x}")]
    OutOfRange { d: u64, k: u64, x: u64 },
    #[error("StateSpaceTooLarge: {work} transition evaluations exceed the budget")]
    StateSpaceTooLarge { work: u128 },
    #[error("Disconnected: the graph is not connected")]
    Disconnected,
    #[error("DimensionMismatch: expected {expected} vectors, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProfile {
    pub degree: usize,
    /// Adjacency eigenvalues, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// `λ₂/d`
    pub gamma: f64,
    /// `max(λ₂, -λₙ)/d`
    pub gamma_plus: f64,
    pub lambda_min: f64,
}

/// Adjacency eigenvalues in nonincreasing order (dense symmetric solver).
pub fn eigenvalues(g: &Graph) -> Vec<f64> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let a = DMatrix::from_row_slice(n, n, &g.adjacency());
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn spectral_profile(g: &Graph) -> Result<SpectralProfile, SpectralError> {
    let d = g.regular_degree().ok_or(SpectralError::NotRegular)?;
    let ev = eigenvalues(g);
    let df = d as f64;
    let l2 = ev.get(1).copied().unwrap_or(ev[0]);
    let ln = *ev.last().unwrap();
    Ok(SpectralProfile { degree: d, gamma: l2 / df, gamma_plus: l2.max(-ln) / df, lambda_min: ln, eigenvalues: ev })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixingMode {
    Exact,
    Spectral,
}

/// `μ(G) = max_S |S|/|V| - 2|E(S)|/(d|S|)` as a reduced fraction, by
/// enumerating every nonempty subset.
pub fn self_mixing_exact(g: &Graph) -> Result<(i64, i64), SpectralError> {
    let n = g.n();
    if n > MIXING_CAP {
        return Err(SpectralError::InstanceTooLarge { n, cap: MIXING_CAP });
    }
    let d = g.regular_degree().ok_or(SpectralError::NotRegular)? as i64;
    let masks: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u))).collect();
    let nn = n as i64;
    // value = (s² d - 2e n) / (n d s)
    let mut best: (i64, i64) = (i64::MIN, 1);
    for set in 1u32..(1u32 << n) {
        let s = set.count_ones() as i64;
        let mut twice_e = 0i64;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            twice_e += (masks[v] & set).count_ones() as i64;
            rest &= rest - 1;
        }
        let num = s * s * d - twice_e * nn;
        let den = nn * d * s;
        if (num as i128) * (best.1 as i128) > (best.0 as i128) * (den as i128) {
            best = (num, den);
        }
    }
    let g_ = num_integer::gcd(best.0.abs(), best.1).max(1);
    Ok((best.0 / g_, best.1 / g_))
}

pub fn self_mixing(g: &Graph, mode: MixingMode) -> Result<f64, SpectralError> {
    match mode {
        MixingMode::Exact => self_mixing_exact(g).map(|(a, b)| a as f64 / b as f64),
        MixingMode::Spectral => spectral_profile(g).map(|p| -p.lambda_min / p.degree as f64),
    }
}

/// `||E(S,T)| - d|S||T|/n| ≤ γ₊ d √(|S||T|)`, with `E(S,T)` counting ordered pairs.
pub fn expander_mixing_check(g: &Graph, s: &[usize], t: &[usize]) -> Result<bool, SpectralError> {
    let p = spectral_profile(g)?;
    let n = g.n();
    let (ms, mt) = (mask(n, s), mask(n, t));
    let e = g.edges_between(&ms, &mt) as f64;
    let (a, b) = (s.len() as f64, t.len() as f64);
    let d = p.degree as f64;
    let dev = num::abs(e - d * a * b / n as f64);
    Ok(le_tol(dev, p.gamma_plus * d * num::sqrt(a * b)))
}

fn mask(n: usize, s: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in s {
        m[v] = true;
    }
    m
}

/// Inside `B`, drops vertices of induced degree above `4dk/n`, then
/// repeatedly removes a minimum-degree vertex while that degree is at most
/// `dk/(8n)` (`k = |B|`). Runs regardless of how large `B` is.
pub fn prune_subset(g: &Graph, b: &[usize]) -> Vec<usize> {
    let n = g.n() as f64;
    let d = g.regular_degree().unwrap_or_else(|| (0..g.n()).map(|v| g.degree(v)).max().unwrap_or(0)) as f64;
    let k = b.len() as f64;
    let in_b = mask(g.n(), b);
    let deg_b = g.induced_degrees(&in_b);
    let mut keep: Vec<bool> = (0..g.n()).map(|v| in_b[v] && deg_b[v] as f64 <= 4.0 * d * k / n).collect();
    let low = d * k / (8.0 * n);
    loop {
        let deg = g.induced_degrees(&keep);
        let min = (0..g.n()).filter(|&v| keep[v]).min_by_key(|&v| (deg[v], v));
        match min {
            Some(v) if deg[v] as f64 <= low => keep[v] = false,
            _ => break,
        }
    }
    (0..g.n()).filter(|&v| keep[v]).collect()
}

/// [`prune_subset`] behind the size requirement `|B| ≥ 8γ₊|V|`.
pub fn expander_subset_prune(g: &Graph, b: &[usize]) -> Result<Vec<usize>, SpectralError> {
    let p = spectral_profile(g)?;
    let required = 8.0 * p.gamma_plus * g.n() as f64;
    if (b.len() as f64) < required {
        return Err(SpectralError::SubsetTooSmall { size: b.len(), required });
    }
    Ok(prune_subset(g, b))
}

/// Both sides of `Σ_{u,v∈C} ‖f(u)-f(v)‖_p^p ≤ (32p)^p |V|/d Σ_{[u,v]∈E(C)} ‖f(u)-f(v)‖_p^p`.
/// The left sum runs over ordered pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PoincareCertificate {
    pub subset: Vec<usize>,
    pub p: f64,
    pub lhs: f64,
    pub edge_sum: f64,
    pub constant: f64,
    pub rhs: f64,
    /// `lhs/rhs`; 0 when both sides vanish.
    pub ratio: f64,
}

impl PoincareCertificate {
    pub fn valid(&self) -> bool {
        le_tol(self.lhs, self.rhs)
    }
}

/// Evaluates the certificate on `c` for `f` given as one vector per vertex of `g`.
pub fn poincare_certificate(g: &Graph, c: &[usize], f: &[Vec<f64>], p: f64) -> Result<PoincareCertificate, SpectralError> {
    if f.len() != g.n() {
        return Err(SpectralError::DimensionMismatch { expected: g.n(), got: f.len() });
    }
    let d = g.regular_degree().ok_or(SpectralError::NotRegular)? as f64;
    let dist = |u: usize, v: usize| f[u].iter().zip(&f[v]).map(|(a, b)| num::pow(num::abs(a - b), p)).sum::<f64>();
    let mut lhs = 0.0;
    for &u in c {
        for &v in c {
            lhs += dist(u, v);
        }
    }
    let in_c = mask(g.n(), c);
    let edge_sum: f64 = g.edges().iter().filter(|&&(u, v)| in_c[u] && in_c[v]).map(|&(u, v)| dist(u, v)).sum();
    let constant = num::pow(32.0 * p, p) * g.n() as f64 / d;
    let rhs = constant * edge_sum;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(PoincareCertificate { subset: c.to_vec(), p, lhs, edge_sum, constant, rhs, ratio })
}

/// Prunes `b` (with the size requirement) and certifies `f` on the result.
pub fn poincare_check(g: &Graph, b: &[usize], f: &[Vec<f64>], p: f64) -> Result<PoincareCertificate, SpectralError> {
    let c = expander_subset_prune(g, b)?;
    poincare_certificate(g, &c, f, p)
}

/// Simple graph joining the pairs at hop distance exactly `t`.
pub fn distance_graph(g: &Graph, t: usize) -> Result<Graph, SpectralError> {
    let diam = g.diameter().ok_or(SpectralError::Disconnected)?;
    if t < 1 || t > diam {
        return Err(SpectralError::TOutOfRange { t, max: diam });
    }
    let mut e = Vec::new();
    for u in 0..g.n() {
        for (v, &dv) in g.bfs(u).iter().enumerate() {
            if v > u && dv == t {
                e.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges(g.n(), &e))
}

/// `K_k^{(d)}(x) = Σ_j (-1)^j C(x,j) C(d-x,k-j)`.
pub fn krawtchouk(d: u64, k: u64, x: u64) -> Result<BigInt, SpectralError> {
    if k > d || x > d {
        return Err(SpectralError::OutOfRange { d, k, x });
    }
    let mut acc = BigInt::zero();
    for j in 0..=k.min(x) {
        let term = binomial(x, j) * binomial(d - x, k - j);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// `min_x K_k^{(d)}(x) ≥ -(64k/d)^{k/2} C(d,k)` for even `k`, in integers:
/// `K · d^{k/2} ≥ -(64k)^{k/2} C(d,k)`.
pub fn krawtchouk_min_check(d: u64, k: u64) -> Result<bool, SpectralError> {
    if k % 2 == 1 || k > d {
        return Err(SpectralError::OutOfRange { d, k, x: 0 });
    }
    let h = (k / 2) as u32;
    let scale = num_traits::Pow::pow(BigInt::from(d), h);
    let bound = -(num_traits::Pow::pow(BigInt::from(64 * k), h) * binomial(d, k));
    for x in 0..=d {
        if krawtchouk(d, k, x)? * &scale < bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftMode {
    Exact,
    Sampled { trials: usize, seed: u64 },
}

/// Work budget (transition evaluations) for the exact drift.
pub const DRIFT_BUDGET: u128 = 4_000_000_000;

/// `E[d(Z_s, Z_0)]` for the stationary simple random walk (`π_v ∝ deg v`).
pub fn markov_drift(g: &Graph, s: usize, mode: DriftMode) -> Result<f64, SpectralError> {
    let n = g.n();
    if !g.is_connected() {
        return Err(SpectralError::Disconnected);
    }
    let vol: f64 = (0..n).map(|v| g.degree(v) as f64).sum();
    match mode {
        DriftMode::Exact => {
            let work = n as u128 * s as u128 * vol as u128;
            if work > DRIFT_BUDGET {
                return Err(SpectralError::StateSpaceTooLarge { work });
            }
            let mut total = 0.0;
            for v in 0..n {
                let mut p = vec![0.0; n];
                p[v] = 1.0;
                for _ in 0..s {
                    let mut next = vec![0.0; n];
                    for u in 0..n {
                        if p[u] > 0.0 {
                            let share = p[u] / g.degree(u) as f64;
                            for &w in g.neighbors(u) {
                                next[w] += share;
                            }
                        }
                    }
                    p = next;
                }
                let dist = g.bfs(v);
                let e: f64 = (0..n).map(|u| p[u] * dist[u] as f64).sum();
                total += g.degree(v) as f64 / vol * e;
            }
            Ok(total)
        }
        DriftMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = 0.0;
            for _ in 0..trials {
                // Stationary start: a uniform endpoint of a uniform directed edge.
                let mut r = rng.gen_range(0.0..vol);
                let mut v = 0;
                while r >= g.degree(v) as f64 {
                    r -= g.degree(v) as f64;
                    v += 1;
                }
                let start = v;
                for _ in 0..s {
                    let nb = g.neighbors(v);
                    v = nb[rng.gen_range(0..nb.len())];
                }
                sum += g.bfs(start)[v] as f64;
            }
            Ok(sum / trials.max(1) as f64)
        }
    }
}

/// `log_{1/γ₊} n + 1`, or `None` when `γ₊ ≥ 1`.
pub fn diameter_bound(g: &Graph) -> Result<Option<f64>, SpectralError> {
    let p = spectral_profile(g)?;
    if p.gamma_plus >= 1.0 || p.gamma_plus <= 0.0 {
        return Ok(None);
    }
    Ok(Some(num::ln(g.n() as f64) / num::ln(1.0 / p.gamma_plus) + 1.0))
}

/// Greedy ball carving: take the smallest remaining vertex and discard
/// everything within hop distance `diam/α` of it. The chosen vertices are
/// pairwise more than `diam/α` apart, so their aspect ratio is below `α`.
pub fn expander_net(g: &Graph, alpha: f64) -> Result<Vec<usize>, SpectralError> {
    let diam = g.diameter().ok_or(SpectralError::Disconnected)? as f64;
    let r = diam / alpha;
    let mut alive = vec![true; g.n()];
    let mut out = Vec::new();
    for v in 0..g.n() {
        if !alive[v] {
            continue;
        }
        out.push(v);
        for (u, &du) in g.bfs(v).iter().enumerate() {
            if du as f64 <= r {
                alive[u] = false;
            }
        }
    }
    Ok(out)
}

/// `n / (3 (d-1)^{r+1})` with `r = diam/α`.
pub fn expander_net_bound(n: usize, d: usize, diam: usize, alpha: f64) -> f64 {
    n as f64 / (3.0 * num::pow(d as f64 - 1.0, diam as f64 / alpha + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, cycle_graph, hypercube, path_graph, petersen};

    fn close(a: f64, b: f64) -> bool {
        num::abs(a - b) <= 1e-8
    }

    #[test]
    fn profiles_of_small_graphs() {
        let k4 = spectral_profile(&complete_graph(4)).unwrap();
        assert!(close(k4.eigenvalues[0], 3.0) && k4.eigenvalues[1..].iter().all(|&l| close(l, -1.0)));
        assert!(close(k4.gamma_plus, 1.0 / 3.0));
        let c6 = spectral_profile(&cycle_graph(6)).unwrap();
        assert!(close(c6.eigenvalues[1], 1.0) && close(c6.gamma, 0.5));
        let p = spectral_profile(&petersen()).unwrap();
        assert!(p.eigenvalues[1..6].iter().all(|&l| close(l, 1.0)));
        assert!(p.eigenvalues[6..].iter().all(|&l| close(l, -2.0)));
        assert!(close(p.gamma_plus, 2.0 / 3.0));
        assert_eq!(spectral_profile(&path_graph(4)), Err(SpectralError::NotRegular));
    }

    #[test]
    fn spectrum_sums() {
        for g in [petersen(), hypercube(5), cycle_graph(9), complete_graph(7)] {
            let ev = eigenvalues(&g);
            let d = g.regular_degree().unwrap() as f64;
            assert!(num::abs(ev.iter().sum::<f64>()) < 1e-6);
            assert!(num::abs(ev.iter().map(|l| l * l).sum::<f64>() - d * g.n() as f64) < 1e-6);
        }
    }

    #[test]
    fn mixing_values() {
        // Values from the standalone enumeration.
        assert_eq!(self_mixing_exact(&complete_graph(4)).unwrap(), (1, 4));
        assert_eq!(self_mixing_exact(&petersen()).unwrap(), (2, 5));
        for g in [petersen(), complete_graph(5), cycle_graph(8), hypercube(3)] {
            let e = self_mixing(&g, MixingMode::Exact).unwrap();
            let s = self_mixing(&g, MixingMode::Spectral).unwrap();
            assert!(e <= s + 1e-9);
        }
        assert!(matches!(self_mixing_exact(&hypercube(5)), Err(SpectralError::InstanceTooLarge { .. })));
    }

    #[test]
    fn mixing_lemma_trivial_cases() {
        let g = petersen();
        let all: Vec<usize> = (0..10).collect();
        assert!(expander_mixing_check(&g, &all, &all).unwrap());
        assert!(expander_mixing_check(&g, &[3], &[3]).unwrap());
    }

    #[test]
    fn pruning_on_complete_graph() {
        let g = complete_graph(12);
        let all: Vec<usize> = (0..12).collect();
        assert_eq!(expander_subset_prune(&g, &all).unwrap(), all);
        assert!(matches!(expander_subset_prune(&g, &[0, 1]), Err(SpectralError::SubsetTooSmall { .. })));
        let f: Vec<Vec<f64>> = vec![vec![1.0, 2.0]; 12];
        let c = poincare_check(&g, &all, &f, 2.0).unwrap();
        assert_eq!((c.lhs, c.rhs, c.ratio), (0.0, 0.0, 0.0));
        assert!(c.valid());
    }

    #[test]
    fn distance_graphs() {
        let g = cycle_graph(6);
        assert_eq!(distance_graph(&g, 1).unwrap().edges().len(), 6);
        let anti = distance_graph(&g, 3).unwrap();
        assert_eq!(anti.regular_degree(), Some(1));
        assert_eq!(anti.edges(), &[(0, 3), (1, 4), (2, 5)]);
        assert_eq!(distance_graph(&petersen(), 2).unwrap().regular_degree(), Some(6));
        assert!(matches!(distance_graph(&g, 4), Err(SpectralError::TOutOfRange { .. })));
    }

    #[test]
    fn krawtchouk_values() {
        assert_eq!(krawtchouk(4, 2, 2).unwrap(), BigInt::from(-2));
        for d in 0..12u64 {
            for k in 0..=d {
                assert_eq!(krawtchouk(d, k, 0).unwrap(), binomial(d, k));
            }
            for x in (0..=d).filter(|_| d >= 1) {
                assert_eq!(krawtchouk(d, 1, x).unwrap(), BigInt::from(d as i64 - 2 * x as i64));
            }
        }
        assert!(matches!(krawtchouk(3, 4, 0), Err(SpectralError::OutOfRange { .. })));
        assert!(krawtchouk_min_check(12, 4).unwrap());
    }

    #[test]
    fn drift_values() {
        let g = petersen();
        assert!(close(markov_drift(&g, 1, DriftMode::Exact).unwrap(), 1.0));
        let two = markov_drift(&g, 2, DriftMode::Exact).unwrap();
        // Two steps return with probability 1/3 and otherwise reach distance 2.
        assert!(close(two, 4.0 / 3.0));
        let sampled = markov_drift(&g, 2, DriftMode::Sampled { trials: 20000, seed: 1 }).unwrap();
        assert!(num::abs(sampled - two) < 0.05);
    }

    #[test]
    fn nets_and_diameter() {
        let g = hypercube(6);
        let net = expander_net(&g, 3.0).unwrap();
        assert!(net.len() as f64 >= expander_net_bound(64, 6, 6, 3.0));
        for (i, &u) in net.iter().enumerate() {
            for &v in &net[i + 1..] {
                assert!(g.bfs(u)[v] > 2);
            }
        }
        let b = diameter_bound(&petersen()).unwrap().unwrap();
        assert!(2.0 <= b);
    }
}
