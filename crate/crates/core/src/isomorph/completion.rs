use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Real `rows × cols` matrix with a subset of specified entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartialJson", into = "PartialJson")]
pub struct PartialMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    i: usize,
    j: usize,
    v: f64,
}

#[derive(Serialize, Deserialize)]
struct PartialJson {
    shape: [usize; 2],
    entries: Vec<EntryJson>,
}

impl TryFrom<PartialJson> for PartialMatrix {
    type Error = crate::error::Error;
    fn try_from(p: PartialJson) -> crate::error::Result<Self> {
        PartialMatrix::new(p.shape[0], p.shape[1], p.entries.into_iter().map(|e| (e.i, e.j, e.v)).collect())
    }
}

impl From<PartialMatrix> for PartialJson {
    fn from(p: PartialMatrix) -> Self {
        PartialJson {
            shape: [p.rows, p.cols],
            entries: p.entries.into_iter().map(|(i, j, v)| EntryJson { i, j, v }).collect(),
        }
    }
}

impl PartialMatrix {
    /// Later duplicates of a position overwrite earlier ones.
    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> crate::error::Result<Self> {
        let mut seen = std::collections::BTreeMap::new();
        for (i, j, v) in entries {
            if i >= rows || j >= cols {
                return Err(crate::error::Error::invalid(format!("entry ({i},{j}) outside {rows}×{cols}")));
            }
            if !v.is_finite() {
                return Err(crate::error::Error::invalid(format!("entry ({i},{j}) is not finite")));
            }
            seen.insert((i, j), v);
        }
        Ok(PartialMatrix { rows, cols, entries: seen.into_iter().map(|((i, j), v)| (i, j, v)).collect() })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == i && e.1 == j).map(|e| e.2)
    }
}

/// Why a partial matrix has no rank-one completion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `A_ij = 0` while both row i and column j carry nonzero entries.
    ZeroEntry { i: usize, j: usize },
    /// Cells of a cycle in the nonzero pattern; `expected` is the value the rest of the cycle forces at `cells[0]`.
    Cycle { cells: Vec<[usize; 2]>, expected: f64, found: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Completion {
    Feasible { e: Vec<f64>, f: Vec<f64> },
    Infeasible { violation: Violation },
}

impl Completion {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Completion::Feasible { .. })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Node {
    Row(usize),
    Col(usize),
}

/// `e fᵀ` agreeing with every specified entry, or the violated condition.
pub fn rank1_complete(a: &PartialMatrix) -> Completion {
    let (n, m) = a.shape();
    let mut e: Vec<Option<f64>> = vec![None; n];
    let mut f: Vec<Option<f64>> = vec![None; m];
    let mut row_nz = vec![false; n];
    let mut col_nz = vec![false; m];
    for &(i, j, v) in a.entries() {
        if v != 0.0 {
            row_nz[i] = true;
            col_nz[j] = true;
        }
    }
    for &(i, j, v) in a.entries() {
        if v == 0.0 {
            if !row_nz[i] {
                e[i] = Some(0.0);
            } else if !col_nz[j] {
                f[j] = Some(0.0);
            } else {
                return Completion::Infeasible { violation: Violation::ZeroEntry { i, j } };
            }
        }
    }
    let mut row_adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut col_adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for &(i, j, v) in a.entries() {
        if v != 0.0 {
            row_adj[i].push((j, v));
            col_adj[j].push((i, v));
        }
    }
    let mut row_parent: Vec<Option<usize>> = vec![None; n];
    let mut col_parent: Vec<Option<usize>> = vec![None; m];
    for root in 0..m {
        if !col_nz[root] || f[root].is_some() {
            continue;
        }
        f[root] = Some(1.0);
        let mut queue = VecDeque::from([Node::Col(root)]);
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Col(j) => {
                    let fj = f[j].unwrap();
                    for &(i, v) in &col_adj[j] {
                        match e[i] {
                            None => {
                                e[i] = Some(v / fj);
                                row_parent[i] = Some(j);
                                queue.push_back(Node::Row(i));
                            }
                            Some(ei) if row_parent[i] != Some(j) => {
                                if let Some(viol) = check(i, j, ei * fj, v, &row_parent, &col_parent) {
                                    return Completion::Infeasible { violation: viol };
                                }
                            }
                            _ => {}
                        }
                    }
                }
                Node::Row(i) => {
                    let ei = e[i].unwrap();
                    for &(j, v) in &row_adj[i] {
                        match f[j] {
                            None => {
                                f[j] = Some(v / ei);
                                col_parent[j] = Some(i);
                                queue.push_back(Node::Col(j));
                            }
                            Some(fj) if col_parent[j] != Some(i) && row_parent[i] != Some(j) => {
                                if let Some(viol) = check(i, j, ei * fj, v, &row_parent, &col_parent) {
                                    return Completion::Infeasible { violation: viol };
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    Completion::Feasible {
        e: e.into_iter().map(|x| x.unwrap_or(1.0)).collect(),
        f: f.into_iter().map(|x| x.unwrap_or(1.0)).collect(),
    }
}

fn check(
    i: usize,
    j: usize,
    expected: f64,
    found: f64,
    row_parent: &[Option<usize>],
    col_parent: &[Option<usize>],
) -> Option<Violation> {
    if (expected - found).abs() <= 1e-9 * (expected.abs() + found.abs()) {
        return None;
    }
    Some(Violation::Cycle { cells: cycle_cells(i, j, row_parent, col_parent), expected, found })
}

/// Cells of the cycle closed by the non-tree edge (i, j), starting with that edge.
fn cycle_cells(i: usize, j: usize, row_parent: &[Option<usize>], col_parent: &[Option<usize>]) -> Vec<[usize; 2]> {
    let up = |start: Node| {
        let mut path = vec![start];
        let mut cur = start;
        loop {
            let next = match cur {
                Node::Row(r) => row_parent[r].map(Node::Col),
                Node::Col(c) => col_parent[c].map(Node::Row),
            };
            match next {
                Some(nx) => {
                    path.push(nx);
                    cur = nx;
                }
                None => break,
            }
        }
        path
    };
    let pi = up(Node::Row(i));
    let pj = up(Node::Col(j));
    let meet = pi.iter().position(|x| pj.contains(x)).unwrap_or(pi.len() - 1);
    let meet_node = pi[meet];
    let mj = pj.iter().position(|x| *x == meet_node).unwrap_or(pj.len() - 1);
    let mut nodes: Vec<Node> = pj[..=mj].to_vec();
    nodes.extend(pi[..meet].iter().rev());
    let cell = |a: Node, b: Node| match (a, b) {
        (Node::Row(r), Node::Col(c)) | (Node::Col(c), Node::Row(r)) => [r, c],
        _ => unreachable!("bipartite path"),
    };
    let mut cells = vec![[i, j]];
    for w in nodes.windows(2) {
        cells.push(cell(w[0], w[1]));
    }
    cells
}

/// Sign vectors with `e_i f_j = A_ij` on the pattern; all entries must be ±1.
pub fn rank1_complete_signs(a: &PartialMatrix) -> crate::error::Result<Completion> {
    if a.entries().iter().any(|e| e.2 != 1.0 && e.2 != -1.0) {
        return Err(crate::error::Error::invalid("sign completion needs entries in {−1, +1}"));
    }
    Ok(rank1_complete(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(rows: &[&[f64]]) -> PartialMatrix {
        let mut es = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                es.push((i, j, v));
            }
        }
        PartialMatrix::new(rows.len(), rows[0].len(), es).unwrap()
    }

    #[test]
    fn spec_examples() {
        let diag = PartialMatrix::new(2, 2, vec![(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(rank1_complete(&diag), Completion::Feasible { e: vec![1.0, 1.0], f: vec![1.0, 1.0] });
        assert_eq!(
            rank1_complete(&full(&[&[1.0, 2.0], &[3.0, 6.0]])),
            Completion::Feasible { e: vec![1.0, 3.0], f: vec![1.0, 2.0] }
        );
        match rank1_complete(&full(&[&[1.0, 2.0], &[3.0, 5.0]])) {
            Completion::Infeasible { violation: Violation::Cycle { cells, .. } } => assert_eq!(cells.len(), 4),
            other => panic!("{other:?}"),
        }
        let single = PartialMatrix::new(2, 2, vec![(0, 0, -1.0)]).unwrap();
        assert_eq!(
            rank1_complete_signs(&single).unwrap(),
            Completion::Feasible { e: vec![-1.0, 1.0], f: vec![1.0, 1.0] }
        );
        assert!(!rank1_complete_signs(&full(&[&[1.0, 1.0], &[1.0, -1.0]])).unwrap().is_feasible());
        assert!(rank1_complete_signs(&full(&[&[1.0, 2.0]])).is_err());
    }

    #[test]
    fn zero_entries_need_a_zero_row_or_column() {
        let a = PartialMatrix::new(2, 2, vec![(0, 0, 0.0), (0, 1, 0.0), (1, 1, 2.0)]).unwrap();
        assert!(rank1_complete(&a).is_feasible());
        let b = full(&[&[0.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(
            rank1_complete(&b),
            Completion::Infeasible { violation: Violation::ZeroEntry { i: 0, j: 0 } }
        );
    }

    #[test]
    fn json_shape() {
        let a: PartialMatrix = serde_json::from_str(r#"{"shape":[2,3],"entries":[{"i":1,"j":2,"v":-1.0}]}"#).unwrap();
        assert_eq!(a.get(1, 2), Some(-1.0));
        assert!(serde_json::from_str::<PartialMatrix>(r#"{"shape":[1,1],"entries":[{"i":1,"j":0,"v":1.0}]}"#).is_err());
    }
}
