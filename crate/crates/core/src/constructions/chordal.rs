use super::expr::{ConeExpr, GlueSpec, Rows};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Simple undirected graph known to be chordal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct ChordalGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for ChordalGraph {
    type Error = Error;
    fn try_from(g: GraphJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|e| (e[0], e[1])).collect();
        ChordalGraph::new(g.n, &edges)
    }
}

impl From<ChordalGraph> for GraphJson {
    fn from(g: ChordalGraph) -> Self {
        GraphJson { n: g.n, edges: g.edges.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

pub(crate) fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

fn normalize_edges(n: usize, edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::invalid(format!("edge ({a},{b}) out of range for {n} vertices")));
        }
        if a == b {
            return Err(Error::invalid(format!("self-loop at vertex {a}")));
        }
        out.push((a.min(b), a.max(b)));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Maximum-cardinality search; ties go to the lowest vertex index.
fn mcs_order(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n).filter(|&v| !done[v]).max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a))).unwrap();
        done[v] = true;
        order.push(v);
        for u in 0..n {
            if adj[v][u] && !done[u] {
                weight[u] += 1;
            }
        }
    }
    order
}

fn earlier_neighbors(adj: &[Vec<bool>], order: &[usize], k: usize) -> Vec<usize> {
    let v = order[k];
    order[..k].iter().copied().filter(|&u| adj[v][u]).collect()
}

/// Chordless cycle `v, a, …, b` through non-adjacent neighbours `a, b` of `v`, if any.
fn cycle_through(adj: &[Vec<bool>], v: usize, a: usize, b: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let blocked: Vec<bool> = (0..n).map(|u| u == v || (adj[v][u] && u != a && u != b)).collect();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([a]);
    seen[a] = true;
    while let Some(u) = queue.pop_front() {
        if u == b {
            let mut path = vec![b];
            let mut cur = b;
            while cur != a {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            let mut cycle = vec![v];
            cycle.extend(path);
            return Some(cycle);
        }
        for w in 0..n {
            if adj[u][w] && !seen[w] && !blocked[w] {
                seen[w] = true;
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

fn canonical_cycle(mut c: Vec<usize>) -> Vec<usize> {
    let pos = c.iter().enumerate().min_by_key(|(_, &x)| x).map(|(i, _)| i).unwrap_or(0);
    c.rotate_left(pos);
    if c.len() > 2 && c[1] > c[c.len() - 1] {
        c[1..].reverse();
    }
    c
}

fn find_chordless_cycle(adj: &[Vec<bool>], hint: Option<usize>) -> Option<Vec<usize>> {
    let n = adj.len();
    let starts: Vec<usize> = hint.into_iter().chain(0..n).collect();
    for v in starts {
        let nb: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if !adj[a][b] {
                    if let Some(c) = cycle_through(adj, v, a, b) {
                        return Some(canonical_cycle(c));
                    }
                }
            }
        }
    }
    None
}

impl ChordalGraph {
    /// Validates chordality; a non-chordal graph yields a chordless cycle of length ≥ 4.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let edges = normalize_edges(n, edges)?;
        let adj = adjacency(n, &edges);
        let order = mcs_order(&adj);
        for k in 0..n {
            let nb = earlier_neighbors(&adj, &order, k);
            let clique = nb.iter().enumerate().all(|(i, &a)| nb[i + 1..].iter().all(|&b| adj[a][b]));
            if !clique {
                let cycle = find_chordless_cycle(&adj, Some(order[k])).unwrap_or_default();
                return Err(Error::NotChordal { cycle });
            }
        }
        Ok(ChordalGraph { n, edges, order })
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        ChordalGraph::new(n, &edges).expect("paths are chordal")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        ChordalGraph::new(n, &edges).expect("complete graphs are chordal")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Ordering in which the earlier neighbours of every vertex form a clique.
    pub fn elimination_order(&self) -> &[usize] {
        &self.order
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        adjacency(self.n, &self.edges)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for w in 0..self.n {
                if adj[u][w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Maximal cliques, read off the elimination order.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut cliques: Vec<Vec<usize>> = Vec::new();
        for k in 0..self.n {
            let mut c = earlier_neighbors(&adj, &self.order, k);
            c.push(self.order[k]);
            c.sort_unstable();
            cliques.retain(|old| !old.iter().all(|v| c.contains(v)));
            if !cliques.iter().any(|old| c.iter().all(|v| old.contains(v))) {
                cliques.push(c);
            }
        }
        cliques
    }

    /// The graph's cone as an intertwining / direct-sum tree in elimination-order
    /// coordinates, wrapped in the permutation back to vertex labels.
    pub fn construction_tree(&self) -> ConeExpr {
        let adj = self.adjacency();
        let n = self.n;
        let mut pos = vec![0usize; n];
        for (k, &v) in self.order.iter().enumerate() {
            pos[v] = k;
        }
        let mut tree = ConeExpr::FullPsd { n: 1 };
        for k in 1..n {
            let mut nb: Vec<usize> = earlier_neighbors(&adj, &self.order, k).iter().map(|&u| pos[u]).collect();
            nb.sort_unstable();
            tree = if nb.is_empty() {
                ConeExpr::DirectSum { children: vec![tree, ConeExpr::FullPsd { n: 1 }] }
            } else {
                let s = nb.len();
                let mut iota1 = DMatrix::zeros(k, s);
                for (c, &p) in nb.iter().enumerate() {
                    iota1[(p, c)] = 1.0;
                }
                let iota2 = DMatrix::identity(s + 1, s);
                ConeExpr::Intertwining {
                    first: Box::new(tree),
                    second: Box::new(ConeExpr::FullPsd { n: s + 1 }),
                    glue: GlueSpec::new(iota1, iota2),
                }
            };
        }
        let mut perm = DMatrix::zeros(n, n);
        for (k, &v) in self.order.iter().enumerate() {
            perm[(k, v)] = 1.0;
        }
        ConeExpr::Congruence { child: Box::new(tree), forward: Rows(perm.transpose()), inverse: Rows(perm) }
    }
}
