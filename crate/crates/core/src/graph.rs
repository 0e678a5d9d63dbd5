//! Undirected graphs on `0..n` with BFS-derived quantities.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Edges are stored normalized as `(min, max)`. Panics on an endpoint
    /// outside `0..n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u},{v}) outside 0..{n}");
            let (a, b) = (u.min(v), u.max(v));
            list.push((a, b));
            adj[a].push(b);
            if a != b {
                adj[b].push(a);
            }
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Graph { n, edges: list, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// The common degree if every vertex has the same one.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first().map(|a| a.len())?;
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn is_simple(&self) -> bool {
        self.edges.iter().all(|&(a, b)| a != b) && self.adj.iter().all(|nb| nb.windows(2).all(|w| w[0] != w[1]))
    }

    /// Hop distances from `s`; `usize::MAX` marks unreachable vertices.
    pub fn bfs(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// Hop diameter, `None` if disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.bfs(s) {
                if d == usize::MAX {
                    return None;
                }
                best = best.max(d);
            }
        }
        Some(best)
    }

    /// Length of a shortest cycle, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        if !self.is_simple() {
            return Some(if self.edges.iter().any(|&(a, b)| a == b) { 1 } else { 2 });
        }
        let mut best = usize::MAX;
        for s in 0..self.n {
            let mut dist = vec![usize::MAX; self.n];
            let mut parent = vec![usize::MAX; self.n];
            let mut queue = VecDeque::new();
            dist[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 1 >= best {
                    break;
                }
                for &v in &self.adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else if parent[u] != v {
                        best = best.min(dist[u] + dist[v] + 1);
                    }
                }
            }
        }
        (best != usize::MAX).then_some(best)
    }

    /// Number of edges with both ends in `mask`.
    pub fn edges_within(&self, mask: &[bool]) -> usize {
        self.edges.iter().filter(|&&(a, b)| mask[a] && mask[b]).count()
    }

    /// Number of (ordered) pairs `(s, t)` with `s in S`, `t in T` adjacent,
    /// i.e. `|E(S,T)|` counting edges inside `S ∩ T` twice.
    pub fn edges_between(&self, s: &[bool], t: &[bool]) -> usize {
        let mut c = 0;
        for &(a, b) in &self.edges {
            if s[a] && t[b] {
                c += 1;
            }
            if s[b] && t[a] {
                c += 1;
            }
        }
        c
    }

    /// Degrees inside the subgraph induced by `mask` (0 outside it).
    pub fn induced_degrees(&self, mask: &[bool]) -> Vec<usize> {
        (0..self.n)
            .map(|v| if mask[v] { self.adj[v].iter().filter(|&&u| mask[u]).count() } else { 0 })
            .collect()
    }

    /// Dense symmetric adjacency matrix, row-major.
    pub fn adjacency(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for &(u, v) in &self.edges {
            a[u * n + v] += 1.0;
            if u != v {
                a[v * n + u] += 1.0;
            }
        }
        a
    }
}

/// The Petersen graph (outer 5-cycle, inner pentagram, spokes).
pub fn petersen() -> Graph {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((5 + i, 5 + (i + 2) % 5));
        e.push((i, 5 + i));
    }
    Graph::from_edges(10, &e)
}

pub fn cycle_graph(n: usize) -> Graph {
    let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &e)
}

pub fn path_graph(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &e)
}

pub fn complete_graph(n: usize) -> Graph {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            e.push((i, j));
        }
    }
    Graph::from_edges(n, &e)
}

/// The `d`-cube: vertices are bit strings, edges flip one bit.
pub fn hypercube(d: u32) -> Graph {
    let n = 1usize << d;
    let mut e = Vec::new();
    for v in 0..n {
        for b in 0..d {
            let u = v ^ (1 << b);
            if v < u {
                e.push((v, u));
            }
        }
    }
    Graph::from_edges(n, &e)
}
