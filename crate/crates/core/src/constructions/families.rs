use super::chordal::ChordalGraph;
use super::expr::{ConeExpr, GlueSpec};
use crate::cone_model::SpectrahedralCone;
use crate::error::{Error, Result};
use crate::symlin::{self, svec, SymMatrix};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

pub(crate) fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// `e_i` and `e_i + e_j`: their outer products span `S^n`.
pub(crate) fn full_generators(n: usize) -> Vec<DVector<f64>> {
    let mut gens: Vec<DVector<f64>> = (0..n).map(|i| unit(n, i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            gens.push(unit(n, i) + unit(n, j));
        }
    }
    gens
}

/// Greedily keeps the vectors whose outer products enlarge the span.
pub(crate) fn independent_products(gens: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for g in gens {
        let mut v = svec(&SymMatrix::outer(g));
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        if v.norm() > 1e-7 * norm0 {
            basis.push(v.normalize());
            kept.push(g.clone());
        }
    }
    kept
}

pub fn full_psd_cone(n: usize) -> Result<SpectrahedralCone> {
    if n == 0 {
        return Err(Error::invalid("cone size must be positive"));
    }
    Ok(SpectrahedralCone::from_generators(n, &full_generators(n))?.with_expr(ConeExpr::FullPsd { n }))
}

pub fn diagonal_cone(n: usize) -> Result<SpectrahedralCone> {
    if n == 0 {
        return Err(Error::invalid("cone size must be positive"));
    }
    let gens: Vec<DVector<f64>> = (0..n).map(|i| unit(n, i)).collect();
    Ok(SpectrahedralCone::from_generators(n, &gens)?.with_expr(ConeExpr::Diagonal { n }))
}

/// Moment vector `(1, t, …, t^{n−1})`.
pub fn moment_vector(n: usize, t: f64) -> DVector<f64> {
    DVector::from_fn(n, |i, _| t.powi(i as i32))
}

/// Homogeneous moment vector `(cos^{n−1}θ, cos^{n−2}θ sinθ, …, sin^{n−1}θ)`; θ = π/2 is the point at infinity.
pub fn moment_vector_homogeneous(n: usize, theta: f64) -> DVector<f64> {
    let (s, c) = theta.sin_cos();
    DVector::from_fn(n, |i, _| c.powi((n - 1 - i) as i32) * s.powi(i as i32))
}

fn sym_unit_basis(m: usize) -> Vec<SymMatrix> {
    let mut out = Vec::new();
    for a in 0..m {
        for b in a..m {
            let mut e = DMatrix::zeros(m, m);
            e[(a, b)] = 1.0;
            e[(b, a)] = 1.0;
            out.push(SymMatrix::symmetrize(e));
        }
    }
    out
}

/// Block-Hankel PSD cone `Han(n,m)` in `S^{nm}`.
pub fn hankel_cone(n: usize, m: usize) -> Result<SpectrahedralCone> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("block sizes must be positive"));
    }
    let size = n * m;
    let mut mats = Vec::new();
    for s in 0..(2 * n - 1) {
        for e in sym_unit_basis(m) {
            let mut x = DMatrix::zeros(size, size);
            for i in 0..n {
                if s >= i && s - i < n {
                    let j = s - i;
                    x.view_mut((i * m, j * m), (m, m)).copy_from(e.matrix());
                }
            }
            mats.push(SymMatrix::symmetrize(x));
        }
    }
    let cone = SpectrahedralCone::from_span(size, &mats)?;
    let node_count = 2 * n - 1;
    let mut xs: Vec<DVector<f64>> = (0..m).map(|a| unit(m, a)).collect();
    for a in 0..m {
        for b in (a + 1)..m {
            xs.push(unit(m, a) + unit(m, b));
        }
    }
    let mut gens = Vec::new();
    for k in 0..node_count {
        let t = ((2 * k + 1) as f64 * PI / (2 * node_count) as f64).cos();
        let v = moment_vector(n, t);
        for x in &xs {
            gens.push(v.kronecker(x));
        }
    }
    let last = unit(n, n - 1);
    for x in &xs {
        gens.push(last.kronecker(x));
    }
    Ok(cone.with_generators(&gens)?.with_expr(ConeExpr::Hankel { n, m }))
}

/// `s(x) = (x1², x2², x3², x2x3, x1x3, x1x2)`
pub fn quartic_lift(x: &[f64; 3]) -> DVector<f64> {
    DVector::from_vec(vec![x[0] * x[0], x[1] * x[1], x[2] * x[2], x[1] * x[2], x[0] * x[2], x[0] * x[1]])
}

fn sphere_points(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Moment cone of ternary quartics in `S^6`, dimension 15.
pub fn ternary_quartic_cone() -> Result<SpectrahedralCone> {
    let mut pts = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    pts.extend(sphere_points(24));
    let gens: Vec<DVector<f64>> = pts.iter().map(quartic_lift).collect();
    let gens = independent_products(&gens);
    Ok(SpectrahedralCone::from_generators(6, &gens)?.with_expr(ConeExpr::TernaryQuartic))
}

/// Codimension-one cone `{X ⪰ 0 : ⟨X,Q⟩ = 0}` for indefinite Q.
pub fn codim1_cone(q: &SymMatrix) -> Result<SpectrahedralCone> {
    let n = q.n();
    let e = symlin::eig_sym(q)?;
    let scale = e.values.amax();
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    if !(e.values.max() > tol && e.values.min() < -tol) {
        return Err(Error::invalid("Q must be indefinite"));
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut ker = Vec::new();
    for (k, &lam) in e.values.iter().enumerate() {
        let v = e.vectors.column(k).into_owned();
        if lam > tol {
            pos.push(v / lam.sqrt());
        } else if lam < -tol {
            neg.push(v / (-lam).sqrt());
        } else {
            ker.push(v);
        }
    }
    let widen = |vs: &[DVector<f64>]| {
        let mut out = vs.to_vec();
        for a in 0..vs.len() {
            for b in (a + 1)..vs.len() {
                out.push((&vs[a] + &vs[b]) / 2f64.sqrt());
            }
        }
        out
    };
    let (pw, nw) = (widen(&pos), widen(&neg));
    let mut pool = Vec::new();
    for p in &pw {
        for m in &nw {
            pool.push(p + m);
            pool.push(p - m);
        }
    }
    let mut kw = ker.clone();
    for a in 0..ker.len() {
        for b in (a + 1)..ker.len() {
            kw.push(&ker[a] + &ker[b]);
        }
    }
    let nulls = pool.clone();
    for w in &kw {
        pool.push(w.clone());
        for z in &nulls {
            pool.push(z + w);
        }
    }
    let gens = independent_products(&pool);
    let cone = SpectrahedralCone::from_constraints(n, std::slice::from_ref(q))?.with_generators(&gens)?;
    if !cone.certificate_complete() {
        return Err(Error::numerical("codimension-one certificate does not span L"));
    }
    Ok(cone.with_expr(ConeExpr::Codim1 { q: q.clone() }))
}

pub(crate) fn check_angles(angles: &[f64; 4]) -> Result<()> {
    for i in 0..4 {
        if !angles[i].is_finite() {
            return Err(Error::invalid("angles must be finite"));
        }
        for j in (i + 1)..4 {
            let d = (angles[i] - angles[j]).rem_euclid(PI);
            if d.min(PI - d) < 1e-9 {
                return Err(Error::invalid(format!("angles {i} and {j} coincide modulo π")));
            }
        }
    }
    Ok(())
}

/// The cross-ratio cone as four rank-one intertwinings of `S^2_+` onto a base `S^2_+`.
pub fn cross_ratio_tree(angles: &[f64; 4]) -> ConeExpr {
    let mut tree = ConeExpr::FullPsd { n: 2 };
    for (j, &phi) in angles.iter().enumerate() {
        let size = 2 + j;
        let mut iota1 = DMatrix::zeros(size, 1);
        iota1[(0, 0)] = phi.cos();
        iota1[(1, 0)] = phi.sin();
        let mut iota2 = DMatrix::zeros(2, 1);
        iota2[(0, 0)] = 1.0;
        tree = ConeExpr::Intertwining {
            first: Box::new(tree),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::new(iota1, iota2),
        };
    }
    tree
}

/// The planes `H_0 = span(e1,e2)` and `H_j = span((cos φ_j, sin φ_j, 0…), e_{2+j})`.
pub fn cross_ratio_planes(angles: &[f64; 4]) -> Vec<DMatrix<f64>> {
    let mut out = vec![DMatrix::from_columns(&[unit(6, 0), unit(6, 1)])];
    for (j, &phi) in angles.iter().enumerate() {
        let mut a = DVector::zeros(6);
        a[0] = phi.cos();
        a[1] = phi.sin();
        out.push(DMatrix::from_columns(&[a, unit(6, 2 + j)]));
    }
    out
}

pub fn cross_ratio_cone(angles: &[f64; 4]) -> Result<SpectrahedralCone> {
    check_angles(angles)?;
    let cone = super::build(&cross_ratio_tree(angles))?;
    Ok(cone.with_expr(ConeExpr::CrossRatio { angles: *angles }))
}

/// Cone spanned by `s(x)s(x)ᵀ` with `s_i = u_i(x)` over the sample points.
pub fn moment_cone_from_samples(u: &[&dyn Fn(&[f64]) -> f64], samples: &[Vec<f64>]) -> Result<SpectrahedralCone> {
    if samples.is_empty() || u.is_empty() {
        return Err(Error::invalid("need at least one sample and one basis function"));
    }
    let vectors: Vec<Vec<f64>> = samples.iter().map(|x| u.iter().map(|f| f(x)).collect()).collect();
    moment_cone_from_vectors(vectors)
}

pub(crate) fn moment_cone_from_vectors(vectors: Vec<Vec<f64>>) -> Result<SpectrahedralCone> {
    let n = vectors[0].len();
    let gens: Vec<DVector<f64>> = vectors.iter().map(|v| DVector::from_column_slice(v)).collect();
    if gens.iter().any(|g| g.len() != n) {
        return Err(Error::invalid("sample vectors must share a length"));
    }
    Ok(SpectrahedralCone::from_generators(n, &gens)?.with_expr(ConeExpr::MomentCone { vectors }))
}

pub fn chordal_cone(g: &ChordalGraph) -> Result<SpectrahedralCone> {
    let tree = super::build(&g.construction_tree())?;
    Ok(tree.with_expr(ConeExpr::Chordal { graph: g.clone() }))
}

pub fn tridiagonal_cone(n: usize) -> Result<SpectrahedralCone> {
    if n == 0 {
        return Err(Error::invalid("cone size must be positive"));
    }
    let tree = super::build(&ChordalGraph::path(n).construction_tree())?;
    Ok(tree.with_expr(ConeExpr::Tridiag { n }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_model::{degree, membership};

    #[test]
    fn hankel_dimensions() {
        for n in 2..=6 {
            let k = hankel_cone(n, 1).unwrap();
            assert_eq!(k.dimension(), 2 * n - 1);
            assert_eq!(degree(&k).unwrap(), n);
            assert!(k.certificate_complete());
        }
        assert_eq!(hankel_cone(2, 2).unwrap().dimension(), 9);
        let h1 = hankel_cone(1, 3).unwrap();
        assert_eq!(h1.dimension(), 6);
    }

    #[test]
    fn ternary_quartic_pattern() {
        let k = ternary_quartic_cone().unwrap();
        assert_eq!(k.dimension(), 15);
        assert_eq!(degree(&k).unwrap(), 6);
        // positions sharing a label in the displayed 6×6 pattern
        let pattern: [[usize; 6]; 6] = [
            [1, 6, 5, 7, 12, 14],
            [6, 2, 4, 15, 8, 10],
            [5, 4, 3, 11, 13, 9],
            [7, 15, 11, 4, 9, 8],
            [12, 8, 13, 9, 5, 7],
            [14, 10, 9, 8, 7, 6],
        ];
        let mut mats = Vec::new();
        for label in 1..=15 {
            let m = DMatrix::from_fn(6, 6, |i, j| if pattern[i][j] == label { 1.0 } else { 0.0 });
            mats.push(SymMatrix::symmetrize(m));
        }
        let reference = SpectrahedralCone::from_span(6, &mats).unwrap();
        for b in k.span_basis() {
            assert!(reference.dist_to_span(&b) < 1e-10);
        }
        let e1 = quartic_lift(&[1.0, 0.0, 0.0]);
        assert_eq!(e1, unit(6, 0));
        assert!(membership(&k, &SymMatrix::outer(&e1), 1e-10).unwrap());
    }

    #[test]
    fn codim1_examples() {
        let k = codim1_cone(&SymMatrix::from_diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(k.dimension(), 2);
        for g in k.generators() {
            assert!((g[0].abs() - g[1].abs()).abs() < 1e-12);
        }
        assert!(codim1_cone(&SymMatrix::from_diagonal(&[1.0, 1.0])).is_err());
        let k = codim1_cone(&SymMatrix::from_diagonal(&[1.0, -1.0, 0.0, 2.0])).unwrap();
        assert_eq!(k.dimension(), 9);
        assert!(k.certificate_complete());
    }

    #[test]
    fn cross_ratio_cone_shape() {
        let angles = [0.3, 1.1, 1.9, 2.7];
        let k = cross_ratio_cone(&angles).unwrap();
        assert_eq!(k.dimension(), 11);
        assert_eq!(degree(&k).unwrap(), 6);
        let planes = cross_ratio_planes(&angles);
        for g in k.generators() {
            let inside = planes.iter().filter(|p| (p.transpose() * g).norm() > 1.0 - 1e-9).count();
            assert!(inside >= 1);
        }
        assert!(cross_ratio_cone(&[0.3, 0.3 + PI, 1.0, 2.0]).is_err());
    }

    #[test]
    fn moment_cone_examples() {
        let fs: [&dyn Fn(&[f64]) -> f64; 3] = [&|_| 1.0, &|x| x[0], &|x| x[0] * x[0]];
        let samples: Vec<Vec<f64>> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|&t| vec![t]).collect();
        let k = moment_cone_from_samples(&fs, &samples).unwrap();
        assert_eq!(k.dimension(), 5);
        let han = hankel_cone(3, 1).unwrap();
        for b in k.span_basis() {
            assert!(han.dist_to_span(&b) < 1e-10);
        }
        let single = moment_cone_from_samples(&fs, &[vec![0.5]]).unwrap();
        assert_eq!((single.dimension(), degree(&single).unwrap()), (1, 1));
    }

    #[test]
    fn chordal_examples() {
        let k = chordal_cone(&ChordalGraph::path(4)).unwrap();
        assert_eq!(k.dimension(), 7);
        assert_eq!(degree(&k).unwrap(), 4);
        let full = chordal_cone(&ChordalGraph::complete(4)).unwrap();
        assert_eq!(full.dimension(), 10);
        let tri = tridiagonal_cone(5).unwrap();
        assert_eq!(tri.dimension(), 9);
        let corner = SymMatrix::sym_outer(&unit(5, 0), &unit(5, 2));
        assert!(tri.dist_to_span(&corner) > 0.5);
    }
}
