use crate::cone_model::{degree, face_of, reduce_nondegenerate, simplicity_partition, tangent_space, SpectrahedralCone};
use crate::error::{Error, Result};
use crate::isomorph::{codim1_signature, generator_planes, plane_meet};
use crate::symlin::{col_span, null_space, svec, svec_len, SymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Isomorphism class of a cone of degree at most four.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum ClassLabel {
    FullPsd { n: usize },
    DirectSum { children: Vec<ClassLabel> },
    /// Codimension one, cut out by a form with `plus ≥ minus` positive/negative eigenvalues.
    Codim1 { plus: usize, minus: usize, zero: usize },
    /// Full extension of `S¹₊ ⊕ S²₊` to size four.
    Codim2FullExt,
    Tri { n: usize },
    /// Full extension of the diagonal cone of size three.
    FullExtDiag3,
    /// Intertwining of `Han³₊` with `S²₊` along a ray.
    IntertwineHan3S2,
    Han4,
    Han22,
    FullExtHan3,
    FullExtDiag2,
    TernaryQuartic,
    Unknown { reason: String },
}

fn unknown(reason: impl Into<String>) -> ClassLabel {
    ClassLabel::Unknown { reason: reason.into() }
}

fn nondegenerate(k: &SpectrahedralCone) -> Result<SpectrahedralCone> {
    if k.generators().is_empty() {
        return Err(Error::MissingCertificate);
    }
    if degree(k)? < k.n() {
        Ok(reduce_nondegenerate(k)?.0)
    } else {
        Ok(k.clone())
    }
}

/// Signature label of a codimension-one cone (after reduction to its degree).
pub fn classify_codim1(k: &SpectrahedralCone) -> Result<ClassLabel> {
    let k = nondegenerate(k)?;
    let codim = svec_len(k.n()) - k.dimension();
    if codim != 1 {
        return Err(Error::WrongCodimension(codim));
    }
    let (plus, minus, zero) = codim1_signature(&k).ok_or(Error::WrongCodimension(codim))?;
    Ok(ClassLabel::Codim1 { plus, minus, zero })
}

/// Catalog label of a cone of degree at most four; non-simple cones are labelled by their factors.
pub fn classify_small(k: &SpectrahedralCone) -> Result<ClassLabel> {
    let k = nondegenerate(k)?;
    if k.n() > 4 {
        return Err(Error::OutOfCatalog(k.n()));
    }
    if !k.certificate_complete() {
        return Err(Error::invalid("certificate does not span L"));
    }
    let parts = simplicity_partition(&k)?;
    if parts.len() > 1 {
        let mut children = Vec::with_capacity(parts.len());
        for h in &parts {
            let face = face_of(&k, h)?;
            children.push(classify_small(&face)?);
        }
        children.sort_by_key(|c| serde_json::to_string(c).unwrap_or_default());
        return Ok(ClassLabel::DirectSum { children });
    }
    let n = k.n();
    let dim = k.dimension();
    if dim == svec_len(n) {
        return Ok(ClassLabel::FullPsd { n });
    }
    Ok(match (n, dim) {
        (3, 5) | (4, 9) => match codim1_signature(&k) {
            Some((1, 1, 1)) => ClassLabel::Tri { n: 3 },
            Some((1, 1, 2)) => ClassLabel::FullExtDiag2,
            Some((2, 1, 1)) => ClassLabel::FullExtHan3,
            Some((2, 2, 0)) => ClassLabel::Han22,
            Some((plus, minus, zero)) => ClassLabel::Codim1 { plus, minus, zero },
            None => unknown("missing constraint form"),
        },
        (4, 8) => ClassLabel::Codim2FullExt,
        (4, 7) => classify_dim7(&k)?,
        _ => unknown(format!("no simple class of degree {n} and dimension {dim}")),
    })
}

/// Planes `H` with `L_n(H) ⊆ L`, found from generator pairs and from two-dimensional
/// tangent spaces at generators.
pub fn full_planes(k: &SpectrahedralCone) -> Option<Vec<DMatrix<f64>>> {
    let mut planes = generator_planes(k, 24)?;
    for g in k.generators() {
        let t = tangent_space(k, g);
        if t.ncols() != 2 {
            continue;
        }
        let gn = g.normalize();
        let y = (0..2)
            .map(|c| {
                let col = t.column(c).into_owned();
                &col - &gn * gn.dot(&col)
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
        if y.norm() < 1e-8 {
            continue;
        }
        let y = y.normalize();
        let yy = SymMatrix::outer(&y);
        if k.dist_to_span(&yy) > 1e-7 {
            continue;
        }
        let p = col_span(&DMatrix::from_columns(&[gn, y]), 1e-10);
        if !planes.iter().any(|q| (q * q.transpose() - &p * p.transpose()).norm() < 1e-7) {
            planes.push(p);
        }
    }
    Some(planes)
}

fn classify_dim7(k: &SpectrahedralCone) -> Result<ClassLabel> {
    let Some(planes) = full_planes(k) else {
        return Ok(unknown("too many two-dimensional full faces"));
    };
    match planes.len() {
        0 => hankel4_test(k),
        1 => Ok(ClassLabel::IntertwineHan3S2),
        3 => {
            let meets: Vec<Option<DVector<f64>>> = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(a, b)| plane_meet(&planes[a], &planes[b]))
                .collect();
            let count = meets.iter().flatten().count();
            let common = count == 3 && {
                let l0 = meets[0].as_ref().unwrap();
                meets.iter().flatten().all(|l| l.dot(l0).abs() > 1.0 - 1e-8)
            };
            Ok(match count {
                3 if common => ClassLabel::FullExtDiag3,
                2 => ClassLabel::Tri { n: 4 },
                _ => unknown("three full planes in an unexpected configuration"),
            })
        }
        c => Ok(unknown(format!("{c} two-dimensional full faces"))),
    }
}

/// The matrix `Y` whose rows are the off-diagonal positions `(1,2), …, (3,4)` and whose
/// column `i` holds the tangent vector at the `i`-th basis ray.
pub fn tangent_matrix(y: &[DVector<f64>; 4]) -> DMatrix<f64> {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut m = DMatrix::zeros(6, 4);
    for (r, &(a, b)) in pairs.iter().enumerate() {
        m[(r, a)] = y[a][b];
        m[(r, b)] = y[b][a];
    }
    m
}

/// Degree-4, dimension-7 cone without `S²₊` faces: recognise `Han⁴₊` from tangent vectors
/// at four independent rays.
fn hankel4_test(k: &SpectrahedralCone) -> Result<ClassLabel> {
    let basis = pivoted_rays(k.generators(), 4);
    if basis.len() < 4 {
        return Ok(unknown("generators do not span R^4"));
    }
    let x = DMatrix::from_columns(&basis);
    let xinv = x.clone().try_inverse().ok_or_else(|| Error::numerical("singular ray basis"))?;
    let mut ys: Vec<DVector<f64>> = Vec::with_capacity(4);
    for (i, xi) in basis.iter().enumerate() {
        let Some(t) = tangent_plane(k, xi) else {
            return Ok(unknown(format!("tangent space at ray {i} is not two-dimensional")));
        };
        // in ray coordinates the tangent plane contains e_i; keep the part off e_i
        let mut w = &xinv * t;
        w.row_mut(i).fill(0.0);
        let best = (0..2).max_by(|&a, &b| w.column(a).norm().total_cmp(&w.column(b).norm())).unwrap();
        ys.push(w.column(best).normalize());
    }
    let y: [DVector<f64>; 4] = [ys[0].clone(), ys[1].clone(), ys[2].clone(), ys[3].clone()];
    let ym = tangent_matrix(&y);
    let big = ym.amax();
    if ym.iter().filter(|v| v.abs() > 1e-8 * big).count() != 12 {
        return Ok(unknown("a column of Y is sparse although there is no S² face"));
    }
    let ker = null_space(&ym, 1e-8);
    if ker.ncols() != 1 {
        return Ok(unknown(format!("Y has rank {}", 4 - ker.ncols())));
    }
    let beta = ker.column(0);
    if beta.iter().any(|b| b.abs() < 1e-8) {
        return Ok(unknown("kernel of Y has a zero entry"));
    }
    let yn: Vec<DVector<f64>> = (0..4).map(|i| &y[i] * beta[i]).collect();
    let v = |i: usize, j: usize| yn[i][j];
    let terms = [1.0 / (v(0, 3) * v(1, 2)), -1.0 / (v(0, 2) * v(1, 3)), 1.0 / (v(0, 1) * v(2, 3))];
    let size: f64 = terms.iter().map(|t| t.abs()).sum();
    if terms.iter().sum::<f64>().abs() > 1e-6 * size {
        return Ok(unknown("the reciprocal tangent identity fails; the span has too few rank-one elements"));
    }
    let r = |i: usize, j: usize| 1.0 / v(i, j);
    let g1 = [
        r(0, 1).powi(2) + r(0, 2).powi(2) + r(0, 3).powi(2),
        r(0, 2) * r(1, 2) + r(0, 3) * r(1, 3),
        r(0, 3) * r(2, 3) - r(0, 1) * r(1, 2),
        -r(0, 1) * r(1, 3) - r(0, 2) * r(2, 3),
    ];
    let g2 = [0.0, r(0, 1), r(0, 2), r(0, 3)];
    let scale = g1.iter().chain(&g2).map(|a| a.abs()).fold(0.0, f64::max).powi(2);
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (g1[i] * g2[j] - g1[j] * g2[i]).abs() <= 1e-9 * scale {
                return Ok(unknown("solution plane is not transversal to the coordinate planes"));
            }
        }
    }
    Ok(ClassLabel::Han4)
}

/// Up to `count` generators chosen by largest residual against the span of those already taken.
fn pivoted_rays(gens: &[DVector<f64>], count: usize) -> Vec<DVector<f64>> {
    let mut chosen: Vec<DVector<f64>> = Vec::new();
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    while chosen.len() < count {
        let best = gens
            .iter()
            .map(|g| {
                let g = g.normalize();
                let mut r = g.clone();
                for q in &ortho {
                    r -= q * q.dot(&r);
                }
                (g, r)
            })
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()));
        match best {
            Some((g, r)) if r.norm() > 1e-8 => {
                ortho.push(r.normalize());
                chosen.push(g);
            }
            _ => break,
        }
    }
    chosen
}

/// Orthonormal basis of `{y : xyᵀ + yxᵀ ∈ L}` when it is two-dimensional with a clear gap.
fn tangent_plane(k: &SpectrahedralCone, x: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = x.len();
    let p = svec_len(n);
    let mut m = DMatrix::zeros(p, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let s = SymMatrix::sym_outer(x, &e);
        m.set_column(j, &svec(&s.sub(&k.project(&s))));
    }
    let svd = crate::symlin::svd(&m);
    let s = svd.singular_values;
    let vt = svd.v_t?;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let smax = s.max().max(x.norm());
    if s[order[1]] > 1e-7 * smax || s[order[2]] < 1e-4 * smax {
        return None;
    }
    Some(DMatrix::from_columns(&[vt.row(order[0]).transpose(), vt.row(order[1]).transpose()]))
}
