//! Rank-one decompositions of cone elements.

mod hankel;
mod oracle;
mod peel;
mod toeplitz;

pub use hankel::decompose_hankel;
pub use toeplitz::{decompose_block_toeplitz, ComplexAtom, ComplexDecomposition};

pub(crate) use oracle::{face_ray, leaf_ray};

use crate::cone_model::{membership, FaceHandle, SpectrahedralCone};
use crate::constructions::{ChordalGraph, ConeExpr};
use crate::error::{Error, Result};
use crate::serde_util;
use crate::symlin::{self, SymMatrix};
use nalgebra::{DMatrix, DVector};
use oracle::split_intertwined;
use peel::Peeler;
use serde::{Deserialize, Serialize};

/// `weight · vector vectorᵀ` with a unit vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankOneAtom {
    pub weight: f64,
    #[serde(with = "serde_util::dvec")]
    pub vector: DVector<f64>,
}

impl RankOneAtom {
    /// Normalizes `v`, moving its squared length into the weight.
    pub fn new(weight: f64, v: DVector<f64>) -> Self {
        let nv = v.norm();
        RankOneAtom { weight: weight * nv * nv, vector: v / nv }
    }

    pub fn outer(&self) -> SymMatrix {
        SymMatrix::outer(&self.vector).scale(self.weight)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    pub atoms: Vec<RankOneAtom>,
    /// `‖X − Σ w x xᵀ‖_F`
    pub residual: f64,
}

impl Decomposition {
    pub fn from_atoms(x: &SymMatrix, atoms: Vec<RankOneAtom>) -> Self {
        let mut r = x.matrix().clone();
        for a in &atoms {
            r -= &a.vector * a.vector.transpose() * a.weight;
        }
        Decomposition { atoms, residual: r.norm() }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn reconstruct(&self, n: usize) -> SymMatrix {
        let mut m = DMatrix::zeros(n, n);
        for a in &self.atoms {
            m += &a.vector * a.vector.transpose() * a.weight;
        }
        SymMatrix::symmetrize(m)
    }

    /// Matrix whose columns are the atom vectors.
    pub fn vectors(&self, n: usize) -> DMatrix<f64> {
        if self.atoms.is_empty() {
            return DMatrix::zeros(n, 0);
        }
        DMatrix::from_columns(&self.atoms.iter().map(|a| a.vector.clone()).collect::<Vec<_>>())
    }
}

fn check_member(k: &SpectrahedralCone, x: &SymMatrix) -> Result<()> {
    if !membership(k, x, 1e-7)? {
        return Err(Error::invalid("matrix is not in the cone"));
    }
    Ok(())
}

fn finish(k: &SpectrahedralCone, x: &SymMatrix, atoms: Vec<RankOneAtom>) -> Result<Decomposition> {
    for (i, a) in atoms.iter().enumerate() {
        if !(a.weight >= 0.0) || !k.contains_outer(&a.vector, 1e-7) {
            return Err(Error::numerical(format!("atom {i} is not a ray of the cone")));
        }
    }
    let dec = Decomposition::from_atoms(x, atoms);
    if dec.residual > 1e-7 * (1.0 + x.norm()) {
        return Err(Error::numerical(format!("decomposition residual {:.3e}", dec.residual)));
    }
    Ok(dec)
}

fn generator_ray(k: &SpectrahedralCone, w: &DMatrix<f64>) -> Result<DVector<f64>> {
    if w.ncols() == 0 {
        return Err(Error::NoRay);
    }
    k.generators()
        .iter()
        .filter(|g| (w.transpose() * *g).norm() > 1.0 - 1e-8)
        .max_by(|a, b| (w.transpose() * *a).norm().total_cmp(&(w.transpose() * *b).norm()))
        .cloned()
        .ok_or_else(|| Error::OracleUnavailable("no certificate ray in this face".into()))
}

/// Splits X into exactly `rank X` rank-one elements of K by repeatedly stepping to the boundary.
pub fn carath_decompose(k: &SpectrahedralCone, x: &SymMatrix) -> Result<Decomposition> {
    check_member(k, x)?;
    let mut peeler = Peeler::new(x);
    match k.expr() {
        Some(ConeExpr::BlockToeplitz { .. }) => return Err(Error::OracleUnavailable("block_toeplitz".into())),
        Some(expr) => {
            let expr = expr.clone();
            peeler.run(0, &mut |cur, w| face_ray(&expr, cur, w))?
        }
        None => peeler.run(0, &mut |_, w| generator_ray(k, w))?,
    }
    finish(k, x, peeler.atoms)
}

/// A nonzero x in H with `xxᵀ` in K.
pub fn extreme_ray_oracle(k: &SpectrahedralCone, h: &FaceHandle) -> Result<DVector<f64>> {
    if h.ambient() != k.n() {
        return Err(Error::DimensionMismatch { expected: k.n(), found: h.ambient() });
    }
    let w = h.basis();
    if w.ncols() == 0 {
        return Err(Error::NoRay);
    }
    let leafy = |e: &ConeExpr| match e {
        ConeExpr::Tridiag { n } => Some(ChordalGraph::path(*n).construction_tree()),
        ConeExpr::Chordal { graph } => Some(graph.construction_tree()),
        _ => None,
    };
    let ray = match k.expr() {
        Some(e) => match leaf_ray(e, w) {
            Err(Error::OracleUnavailable(_)) => {
                let tree = leafy(e);
                match tree {
                    Some(t) => leaf_ray(&t, w).or_else(|_| generator_ray(k, w)),
                    None => generator_ray(k, w),
                }
            }
            other => other,
        },
        None => generator_ray(k, w),
    };
    let ray = ray.map_err(|e| match e {
        Error::OracleUnavailable(_) => Error::NoRay,
        other => other,
    })?;
    Ok(ray.normalize())
}

/// Decomposition that follows the construction tree node by node.
fn structural(expr: &ConeExpr, x: &SymMatrix) -> Result<Vec<RankOneAtom>> {
    let n = x.n();
    if x.norm() == 0.0 {
        return Ok(Vec::new());
    }
    match expr {
        ConeExpr::Tridiag { n } => structural(&ChordalGraph::path(*n).construction_tree(), x),
        ConeExpr::Chordal { graph } => structural(&graph.construction_tree(), x),
        ConeExpr::CrossRatio { angles } => structural(&crate::constructions::cross_ratio_tree(angles), x),
        ConeExpr::Hankel { n: hn, m } => Ok(decompose_hankel(x, *hn, *m)?.atoms),
        ConeExpr::DirectSum { children } => {
            let mut atoms = Vec::new();
            let mut offset = 0;
            for child in children {
                let s = child.size();
                let block = SymMatrix::symmetrize(x.matrix().view((offset, offset), (s, s)).into_owned());
                for a in structural(child, &block)? {
                    let mut v = DVector::zeros(n);
                    v.rows_mut(offset, s).copy_from(&a.vector);
                    atoms.push(RankOneAtom { weight: a.weight, vector: v });
                }
                offset += s;
            }
            Ok(atoms)
        }
        ConeExpr::FullExtension { child, .. } => extension_atoms(child, x),
        ConeExpr::Intertwining { first, second, glue } => {
            let (x1, x2, f1, f2) = split_intertwined(first.size(), second.size(), glue, x)?;
            let mut atoms: Vec<RankOneAtom> =
                structural(first, &x1)?.into_iter().map(|a| RankOneAtom::new(a.weight, &f1 * a.vector)).collect();
            atoms.extend(structural(second, &x2)?.into_iter().map(|a| RankOneAtom::new(a.weight, &f2 * a.vector)));
            Ok(atoms)
        }
        ConeExpr::Congruence { child, forward, inverse } => {
            let xc = x.congruence(&inverse.0);
            Ok(structural(child, &xc)?
                .into_iter()
                .map(|a| RankOneAtom::new(a.weight, &forward.0 * a.vector))
                .collect())
        }
        ConeExpr::BlockToeplitz { .. } => Err(Error::OracleUnavailable("block_toeplitz".into())),
        leaf => {
            let mut p = Peeler::new(x);
            p.run(0, &mut |_, w| leaf_ray(leaf, w))?;
            Ok(p.atoms)
        }
    }
}

fn extension_atoms(child: &ConeExpr, x: &SymMatrix) -> Result<Vec<RankOneAtom>> {
    let n = x.n();
    let c = child.size();
    let t = n - c;
    let xm = x.matrix();
    let x11 = SymMatrix::symmetrize(xm.view((0, 0), (c, c)).into_owned());
    let x12 = xm.view((0, c), (c, t)).into_owned();
    let x22 = xm.view((c, c), (t, t)).into_owned();
    let head = structural(child, &x11)?;
    let mut atoms = Vec::new();
    let mut wwt = DMatrix::zeros(t, t);
    if !head.is_empty() {
        let cols: Vec<DVector<f64>> = head.iter().map(|a| &a.vector * a.weight.sqrt()).collect();
        let v = DMatrix::from_columns(&cols);
        let wt = symlin::lstsq(&v, &x12, 1e-12);
        for (i, col) in cols.iter().enumerate() {
            let mut h = DVector::zeros(n);
            h.rows_mut(0, c).copy_from(col);
            h.rows_mut(c, t).copy_from(&wt.row(i).transpose());
            atoms.push(RankOneAtom::new(1.0, h));
        }
        wwt = wt.transpose() * &wt;
    }
    let schur = SymMatrix::symmetrize(x22 - wwt);
    let e = symlin::eig(&schur);
    let scale = 1.0 + x.norm();
    if e.values.iter().any(|&l| l < -1e-8 * scale) {
        return Err(Error::numerical("Schur complement of the extension is not PSD"));
    }
    for (j, &lam) in e.values.iter().enumerate() {
        if lam > 1e-9 * scale {
            let mut h = DVector::zeros(n);
            h.rows_mut(c, t).copy_from(&e.vectors.column(j));
            atoms.push(RankOneAtom::new(lam, h));
        }
    }
    Ok(atoms)
}

/// Decomposition of an element of a full extension: leading block by the child, the rest by Schur complement.
pub fn decompose_full_extension(k: &SpectrahedralCone, x: &SymMatrix) -> Result<Decomposition> {
    check_member(k, x)?;
    match k.expr() {
        Some(ConeExpr::FullExtension { child, .. }) => finish(k, x, extension_atoms(child, x)?),
        _ => Err(Error::invalid("cone was not built by full_extension")),
    }
}

/// Decomposition of an element of an intertwined cone through its split into the two children.
pub fn decompose_intertwining(k: &SpectrahedralCone, x: &SymMatrix) -> Result<Decomposition> {
    check_member(k, x)?;
    match k.expr() {
        Some(e @ ConeExpr::Intertwining { .. }) => finish(k, x, structural(e, x)?),
        _ => Err(Error::invalid("cone was not built by intertwine")),
    }
}

/// Decomposition along the attached construction tree.
pub fn decompose_by_tree(k: &SpectrahedralCone, x: &SymMatrix) -> Result<Decomposition> {
    check_member(k, x)?;
    let expr = k.expr().ok_or_else(|| Error::OracleUnavailable("cone without construction tree".into()))?;
    finish(k, x, structural(expr, x)?)
}
