use super::{degree, FaceHandle, SpectrahedralCone};
use crate::error::{Error, Result};
use crate::symlin::{col_span, null_space, SymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Minimally linearly dependent generator subset with its kernel vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MldSet {
    pub indices: Vec<usize>,
    pub kernel_coeffs: Vec<f64>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn check_nondegenerate_complete(k: &SpectrahedralCone) -> Result<()> {
    if degree(k)? < k.n() {
        return Err(Error::Degenerate);
    }
    if !k.certificate_complete() {
        return Err(Error::invalid("certificate does not span L"));
    }
    Ok(())
}

/// Connected components of the linear matroid on the generators: every
/// generator outside a greedy basis is joined to its fundamental circuit.
fn generator_components(gens: &[DVector<f64>], n: usize) -> Vec<Vec<usize>> {
    let m = gens.len();
    let mut uf = UnionFind::new(m);
    let mut basis_idx: Vec<usize> = Vec::new();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let mut trial = cols.clone();
        trial.push(g.clone());
        if col_span(&DMatrix::from_columns(&trial), 1e-9).ncols() == trial.len() {
            cols = trial;
            basis_idx.push(i);
            if cols.len() == n {
                break;
            }
        }
    }
    if cols.is_empty() {
        return Vec::new();
    }
    let b = DMatrix::from_columns(&cols);
    for (i, g) in gens.iter().enumerate() {
        if basis_idx.contains(&i) {
            continue;
        }
        let c = crate::symlin::lstsq(&b, &DMatrix::from_column_slice(g.len(), 1, g.as_slice()), 1e-12);
        let cmax = c.amax();
        for (j, &bi) in basis_idx.iter().enumerate() {
            if c[(j, 0)].abs() > 1e-8 * cmax {
                uf.union(i, bi);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        let r = uf.find(i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Finest direct-sum splitting `R^n = ⊕ H_k` with every generator inside one `H_k`.
pub fn simplicity_partition(k: &SpectrahedralCone) -> Result<Vec<FaceHandle>> {
    check_nondegenerate_complete(k)?;
    let groups = generator_components(k.generators(), k.n());
    Ok(groups
        .iter()
        .map(|g| {
            let vs: Vec<DVector<f64>> = g.iter().map(|&i| k.generators()[i].clone()).collect();
            FaceHandle::from_vectors(k.n(), &vs)
        })
        .collect())
}

/// Generators spanning one-dimensional factors of the simplicity partition.
pub fn isolated_rays(k: &SpectrahedralCone) -> Result<Vec<usize>> {
    check_nondegenerate_complete(k)?;
    let groups = generator_components(k.generators(), k.n());
    Ok(groups.iter().filter(|g| g.len() == 1).map(|g| g[0]).collect())
}

/// All MLD subsets of the generators of size ≤ `max_size`.
pub fn find_mld_sets(k: &SpectrahedralCone, max_size: usize) -> Result<Vec<MldSet>> {
    if k.generators().is_empty() {
        return Err(Error::MissingCertificate);
    }
    Ok(mld_sets_of(k.generators(), max_size))
}

pub(crate) fn mld_sets_of(gens: &[DVector<f64>], max_size: usize) -> Vec<MldSet> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    extend_independent(gens, max_size, 0, &mut current, &mut out);
    out.sort_by(|a, b| a.indices.len().cmp(&b.indices.len()).then_with(|| a.indices.cmp(&b.indices)));
    out
}

fn extend_independent(
    gens: &[DVector<f64>],
    max_size: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<MldSet>,
) {
    if current.len() >= max_size {
        return;
    }
    for j in start..gens.len() {
        current.push(j);
        let cols: Vec<DVector<f64>> = current.iter().map(|&i| gens[i].clone()).collect();
        let m = DMatrix::from_columns(&cols);
        let ns = null_space(&m, 1e-9);
        match ns.ncols() {
            0 => extend_independent(gens, max_size, j + 1, current, out),
            1 => {
                let c = ns.column(0);
                let cmax = c.amax();
                if current.len() >= 2 && c.iter().all(|v| v.abs() > 1e-8 * cmax.max(1e-300) && v.abs() > 1e-8) {
                    let s = if c[0] < 0.0 { -1.0 } else { 1.0 };
                    out.push(MldSet { indices: current.clone(), kernel_coeffs: c.iter().map(|v| v * s).collect() });
                }
            }
            _ => {}
        }
        current.pop();
    }
}

/// Basis in which X is `diag(1,…,1,0,…,0)`, built from a rank-one decomposition of X.
pub fn diagonalizing_basis(k: &SpectrahedralCone, x: &SymMatrix) -> Result<DMatrix<f64>> {
    let dec = crate::decompose::carath_decompose(k, x)?;
    let n = k.n();
    let mut cols: Vec<DVector<f64>> = dec.atoms.iter().map(|a| &a.vector * a.weight.sqrt()).collect();
    let head = if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
    let comp = crate::symlin::orthonormal_complement(&head, 1e-10);
    cols.extend(comp.column_iter().map(|c| c.into_owned()));
    Ok(DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build, chordal_cone, direct_sum, hankel_cone, ChordalGraph, ConeExpr};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn partition_examples() {
        let s1 = build(&ConeExpr::FullPsd { n: 1 }).unwrap();
        let s2 = build(&ConeExpr::FullPsd { n: 2 }).unwrap();
        let k = direct_sum(&s1, &s2).unwrap();
        let mut dims: Vec<usize> = simplicity_partition(&k).unwrap().iter().map(FaceHandle::dim).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
        let tri4 = build(&ConeExpr::Tridiag { n: 4 }).unwrap();
        assert_eq!(simplicity_partition(&tri4).unwrap().len(), 1);
        let two_edges = chordal_cone(&ChordalGraph::new(4, &[(0, 1), (2, 3)]).unwrap()).unwrap();
        assert_eq!(simplicity_partition(&two_edges).unwrap().len(), 2);
    }

    #[test]
    fn partition_handles_e1_e2_sum() {
        // pairwise span tests never merge here, the circuit does
        let k = SpectrahedralCone::from_generators(2, &[v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])]).unwrap();
        assert_eq!(simplicity_partition(&k).unwrap().len(), 1);
    }

    #[test]
    fn degenerate_cone_is_rejected() {
        let k = SpectrahedralCone::from_generators(3, &[v(&[1.0, 0.0, 0.0])]).unwrap();
        assert!(matches!(simplicity_partition(&k), Err(Error::Degenerate)));
    }

    #[test]
    fn isolated_ray_examples() {
        let diag3 = build(&ConeExpr::Diagonal { n: 3 }).unwrap();
        assert_eq!(isolated_rays(&diag3).unwrap().len(), 3);
        let s2 = build(&ConeExpr::FullPsd { n: 2 }).unwrap();
        assert!(isolated_rays(&s2).unwrap().is_empty());
        let s1 = build(&ConeExpr::FullPsd { n: 1 }).unwrap();
        let k = direct_sum(&s2, &s1).unwrap();
        let iso = isolated_rays(&k).unwrap();
        assert_eq!(iso.len(), 1);
        assert!((k.generators()[iso[0]][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mld_examples() {
        let sets = mld_sets_of(&[v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])], 6);
        assert_eq!(sets.len(), 1);
        let c = &sets[0].kernel_coeffs;
        assert!((c[0] - c[1]).abs() < 1e-12 && (c[0] + c[2]).abs() < 1e-12);
        assert!(mld_sets_of(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])], 6).is_empty());
        let four = [v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0]), v(&[1.0, 1.0, 1.0])];
        let sets = mld_sets_of(&four, 6);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].indices.len(), 4);
    }

    #[test]
    fn diagonalizing_basis_examples() {
        let s3 = build(&ConeExpr::FullPsd { n: 3 }).unwrap();
        let p = diagonalizing_basis(&s3, &SymMatrix::identity(3)).unwrap();
        let pinv = p.clone().try_inverse().unwrap();
        let d = pinv.clone() * SymMatrix::identity(3).matrix() * pinv.transpose();
        assert!((d - DMatrix::<f64>::identity(3, 3)).norm() < 1e-9);

        let han = hankel_cone(3, 1).unwrap();
        let (v0, v1) = (v(&[1.0, 0.0, 0.0]), v(&[1.0, 1.0, 1.0]));
        let x = SymMatrix::outer(&v0).add(&SymMatrix::outer(&v1));
        let p = diagonalizing_basis(&han, &x).unwrap();
        let pinv = p.clone().try_inverse().unwrap();
        let d = &pinv * x.matrix() * pinv.transpose();
        assert!((d - DMatrix::from_diagonal(&v(&[1.0, 1.0, 0.0]))).norm() < 1e-7);
        let head: Vec<DVector<f64>> = (0..2).map(|j| p.column(j).normalize()).collect();
        for target in [v0, v1.normalize()] {
            assert!(head.iter().any(|h| (h.dot(&target).abs() - 1.0).abs() < 1e-7));
        }
        // diag(d1, d2, 0) in the new coordinates stays in the cone
        let e = &p.columns(0, 2);
        let y = SymMatrix::symmetrize(e * DMatrix::from_diagonal(&v(&[0.3, 2.0])) * e.transpose());
        assert!(crate::cone_model::membership(&han, &y, 1e-7).unwrap());

        let diag = build(&ConeExpr::Diagonal { n: 3 }).unwrap();
        let p = diagonalizing_basis(&diag, &SymMatrix::from_diagonal(&[2.0, 3.0, 0.0])).unwrap();
        let cols: Vec<f64> = (0..2).map(|j| p.column(j).norm()).collect();
        assert!(cols.iter().any(|c| (c - 2f64.sqrt()).abs() < 1e-9));
        assert!(cols.iter().any(|c| (c - 3f64.sqrt()).abs() < 1e-9));
    }
}
