use super::expr::{ConeExpr, GlueSpec};
use super::families::unit;
use crate::cone_model::SpectrahedralCone;
use crate::error::{Error, Result};
use crate::symlin::{col_span, orthonormal_complement, SymMatrix, DEFAULT_TOL};
use nalgebra::{DMatrix, DVector};

fn pad(x: &DVector<f64>, offset: usize, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    out.rows_mut(offset, x.len()).copy_from(x);
    out
}

fn embed(m: &SymMatrix, offset: usize, n: usize) -> SymMatrix {
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((offset, offset), (m.n(), m.n())).copy_from(m.matrix());
    SymMatrix::symmetrize(out)
}

/// Block-diagonal cone `{diag(X1, X2)}`.
pub fn direct_sum(k1: &SpectrahedralCone, k2: &SpectrahedralCone) -> Result<SpectrahedralCone> {
    let (n1, n2) = (k1.n(), k2.n());
    let n = n1 + n2;
    let mut mats: Vec<SymMatrix> = k1.span_basis().iter().map(|b| embed(b, 0, n)).collect();
    mats.extend(k2.span_basis().iter().map(|b| embed(b, n1, n)));
    let mut gens: Vec<DVector<f64>> = k1.generators().iter().map(|g| pad(g, 0, n)).collect();
    gens.extend(k2.generators().iter().map(|g| pad(g, n1, n)));
    let mut cone = SpectrahedralCone::from_span(n, &mats)?.with_generators(&gens)?;
    if let (Some(a), Some(b)) = (k1.expr(), k2.expr()) {
        cone = cone.with_expr(ConeExpr::DirectSum { children: vec![a.clone(), b.clone()] });
    }
    Ok(cone)
}

/// Cone of size n whose leading block lies in `k1` and whose remaining rows and columns are free.
pub fn full_extension(k1: &SpectrahedralCone, n: usize) -> Result<SpectrahedralCone> {
    let n1 = k1.n();
    if n <= n1 {
        return Err(Error::invalid(format!("extension size {n} must exceed {n1}")));
    }
    if k1.generators().is_empty() {
        return Err(Error::MissingCertificate);
    }
    let gram = k1.generators().iter().fold(DMatrix::zeros(n1, n1), |acc, g| acc + g * g.transpose());
    let image = col_span(&gram, DEFAULT_TOL);
    let mut mats: Vec<SymMatrix> = k1.span_basis().iter().map(|b| embed(b, 0, n)).collect();
    for a in 0..image.ncols() {
        let u = pad(&image.column(a).into_owned(), 0, n);
        for j in n1..n {
            mats.push(SymMatrix::sym_outer(&u, &unit(n, j)));
        }
    }
    for i in n1..n {
        for j in i..n {
            mats.push(SymMatrix::sym_outer(&unit(n, i), &unit(n, j)));
        }
    }
    let mut gens = Vec::new();
    for g in k1.generators() {
        let lifted = pad(g, 0, n);
        gens.push(lifted.clone());
        for j in n1..n {
            gens.push(&lifted + unit(n, j));
        }
    }
    for i in n1..n {
        gens.push(unit(n, i));
        for j in (i + 1)..n {
            gens.push(unit(n, i) + unit(n, j));
        }
    }
    let mut cone = SpectrahedralCone::from_span(n, &mats)?.with_generators(&gens)?;
    if let Some(e) = k1.expr() {
        cone = cone.with_expr(ConeExpr::FullExtension { child: Box::new(e.clone()), n });
    }
    Ok(cone)
}

/// Coordinates of an intertwining: `f1` embeds the first child as the leading block,
/// `f2` sends `iota2` onto `f1·iota1` and the complement of `iota2` onto the trailing block.
#[derive(Clone, Debug)]
pub(crate) struct IntertwineMaps {
    pub f1: DMatrix<f64>,
    pub f2: DMatrix<f64>,
    /// `[C1 | ι1]`: orthonormal complement of `ι1` followed by `ι1`, in `R^{n1}`.
    pub head: DMatrix<f64>,
    /// `[ι2 | C2]` in `R^{n2}`.
    pub tail: DMatrix<f64>,
    /// Change of basis `B = [f1 C1 | f1 ι1 | f2 C2]` in which the corner block vanishes.
    pub split: DMatrix<f64>,
    pub blocks: (usize, usize, usize),
}

pub(crate) fn intertwine_maps(n1: usize, n2: usize, glue: &GlueSpec) -> Result<IntertwineMaps> {
    let (i1, i2) = (&glue.iota1.0, &glue.iota2.0);
    let k = glue.rank();
    if k == 0 {
        return Err(Error::InvalidGlue("rank-0 glue; use a direct sum".into()));
    }
    if i1.nrows() != n1 || i2.nrows() != n2 || i2.ncols() != k {
        return Err(Error::InvalidGlue("glue shapes do not match the children".into()));
    }
    if col_span(i1, 1e-10).ncols() != k || col_span(i2, 1e-10).ncols() != k {
        return Err(Error::InvalidGlue("glue maps must have full column rank".into()));
    }
    let n = n1 + n2 - k;
    let c1 = orthonormal_complement(i1, 1e-10);
    let c2 = orthonormal_complement(i2, 1e-10);
    let mut f1 = DMatrix::zeros(n, n1);
    f1.view_mut((0, 0), (n1, n1)).fill_with_identity();
    let mut tail = DMatrix::zeros(n2, n2);
    tail.view_mut((0, 0), (n2, k)).copy_from(i2);
    tail.view_mut((0, k), (n2, n2 - k)).copy_from(&c2);
    let tail_inv = tail.clone().try_inverse().ok_or_else(|| Error::InvalidGlue("singular glue".into()))?;
    let mut lift = DMatrix::zeros(n, n2);
    lift.view_mut((0, 0), (n1, k)).copy_from(i1);
    lift.view_mut((n1, k), (n2 - k, n2 - k)).fill_with_identity();
    let f2 = &lift * tail_inv;
    let mut head = DMatrix::zeros(n1, n1);
    head.view_mut((0, 0), (n1, n1 - k)).copy_from(&c1);
    head.view_mut((0, n1 - k), (n1, k)).copy_from(i1);
    let mut split = DMatrix::zeros(n, n);
    split.view_mut((0, 0), (n1, n1)).copy_from(&head);
    split.view_mut((n1, n1), (n2 - k, n2 - k)).fill_with_identity();
    Ok(IntertwineMaps { f1, f2, head, tail, split, blocks: (n1 - k, k, n2 - k) })
}

fn check_full_face(k: &SpectrahedralCone, iota: &DMatrix<f64>, which: usize) -> Result<()> {
    let cols: Vec<DVector<f64>> = iota.column_iter().map(|c| c.into_owned()).collect();
    for a in 0..cols.len() {
        for b in a..cols.len() {
            let m = SymMatrix::sym_outer(&cols[a], &cols[b]);
            if k.dist_to_span(&m) > 1e-8 * m.norm() {
                return Err(Error::InvalidGlue(format!(
                    "glue subspace of child {which} does not span a full face"
                )));
            }
        }
    }
    Ok(())
}

/// Glues two cones along full faces of equal rank.
pub fn intertwine(k1: &SpectrahedralCone, k2: &SpectrahedralCone, glue: &GlueSpec) -> Result<SpectrahedralCone> {
    let maps = intertwine_maps(k1.n(), k2.n(), glue)?;
    check_full_face(k1, &glue.iota1.0, 1)?;
    check_full_face(k2, &glue.iota2.0, 2)?;
    let n = maps.f1.nrows();
    let mut mats: Vec<SymMatrix> = k1.span_basis().iter().map(|b| b.congruence(&maps.f1)).collect();
    mats.extend(k2.span_basis().iter().map(|b| b.congruence(&maps.f2)));
    let mut gens: Vec<DVector<f64>> = k1.generators().iter().map(|g| &maps.f1 * g).collect();
    gens.extend(k2.generators().iter().map(|g| &maps.f2 * g));
    let mut cone = SpectrahedralCone::from_span(n, &mats)?.with_generators(&gens)?;
    if let (Some(a), Some(b)) = (k1.expr(), k2.expr()) {
        cone = cone.with_expr(ConeExpr::Intertwining {
            first: Box::new(a.clone()),
            second: Box::new(b.clone()),
            glue: glue.clone(),
        });
    }
    Ok(cone)
}

/// `{F X Fᵀ : X ∈ k}` for a full-column-rank `F`.
pub(crate) fn frame_image(k: &SpectrahedralCone, forward: &DMatrix<f64>) -> Result<SpectrahedralCone> {
    let n = forward.nrows();
    let mats: Vec<SymMatrix> = k.span_basis().iter().map(|b| b.congruence(forward)).collect();
    let gens: Vec<DVector<f64>> = k.generators().iter().map(|g| forward * g).collect();
    SpectrahedralCone::from_span(n, &mats)?.with_generators(&gens)
}
