//! Spectrahedral cones `K = L ∩ S^n_+` carrying a rank-one certificate.

mod analysis;
mod serial;

pub use analysis::{diagonalizing_basis, find_mld_sets, isolated_rays, simplicity_partition, MldSet};

use crate::constructions::{ConeExpr, Rows};
use crate::error::{Error, Result};
use crate::symlin::{self, col_span, null_space, null_space_scaled, smat, svec, svec_len, SymMatrix, DEFAULT_TOL};
use nalgebra::{DMatrix, DVector};

/// Tolerance for "generator lies in L".
pub const GENERATOR_TOL: f64 = 1e-8;
/// Relative threshold for span-rank decisions.
pub(crate) const SPAN_TOL: f64 = 1e-9;
/// Two unit rays are equal when `|⟨x,y⟩| > 1 − RAY_TOL`.
pub const RAY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SpectrahedralCone {
    n: usize,
    /// Orthonormal basis of L in svec coordinates, one column per basis element.
    basis: DMatrix<f64>,
    generators: Vec<DVector<f64>>,
    expr: Option<ConeExpr>,
}

/// Orthonormal basis of a subspace `H ⊆ R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceHandle {
    basis: DMatrix<f64>,
}

impl FaceHandle {
    /// Orthonormalizes the given columns.
    pub fn new(vectors: &DMatrix<f64>) -> Self {
        FaceHandle { basis: col_span(vectors, 1e-10) }
    }

    pub fn from_vectors(n: usize, vs: &[DVector<f64>]) -> Self {
        if vs.is_empty() {
            return FaceHandle { basis: DMatrix::zeros(n, 0) };
        }
        Self::new(&DMatrix::from_columns(vs))
    }

    pub fn full(n: usize) -> Self {
        FaceHandle { basis: DMatrix::identity(n, n) }
    }

    pub fn coordinates(n: usize, idx: &[usize]) -> Self {
        let mut b = DMatrix::zeros(n, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            b[(i, c)] = 1.0;
        }
        FaceHandle { basis: b }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    /// `1 − ‖P_H x‖/‖x‖`
    pub fn defect(&self, x: &DVector<f64>) -> f64 {
        let nx = x.norm();
        if nx == 0.0 {
            return 0.0;
        }
        1.0 - (self.basis.transpose() * x).norm() / nx
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.defect(x) <= RAY_TOL
    }
}

fn unit_sign_normalized(x: &DVector<f64>) -> Option<DVector<f64>> {
    let nx = x.norm();
    if !(nx > 0.0) || !nx.is_finite() {
        return None;
    }
    let mut v = x / nx;
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-9) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    Some(v)
}

pub(crate) fn same_ray(x: &DVector<f64>, y: &DVector<f64>) -> bool {
    x.dot(y).abs() > 1.0 - RAY_TOL
}

impl SpectrahedralCone {
    /// Cone with `L = span(mats)` and no certificate.
    pub fn from_span(n: usize, mats: &[SymMatrix]) -> Result<Self> {
        for m in mats {
            if m.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.n() });
            }
        }
        let cols: Vec<DVector<f64>> = mats.iter().map(svec).collect();
        let basis = if cols.is_empty() {
            DMatrix::zeros(svec_len(n), 0)
        } else {
            col_span(&DMatrix::from_columns(&cols), SPAN_TOL)
        };
        Ok(SpectrahedralCone { n, basis, generators: Vec::new(), expr: None })
    }

    /// Cone whose span is the orthogonal complement of the given forms: `L = {X : ⟨A_i,X⟩ = 0}`.
    pub fn from_constraints(n: usize, forms: &[SymMatrix]) -> Result<Self> {
        for m in forms {
            if m.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.n() });
            }
        }
        let p = svec_len(n);
        let basis = if forms.is_empty() {
            DMatrix::identity(p, p)
        } else {
            let rows: Vec<DVector<f64>> = forms.iter().map(svec).collect();
            let a = DMatrix::from_columns(&rows).transpose();
            null_space(&a, SPAN_TOL)
        };
        Ok(SpectrahedralCone { n, basis, generators: Vec::new(), expr: None })
    }

    /// Cone spanned by the outer products of `gens`, with `gens` as certificate.
    pub fn from_generators(n: usize, gens: &[DVector<f64>]) -> Result<Self> {
        let mats: Vec<SymMatrix> = gens.iter().map(SymMatrix::outer).collect();
        Self::from_span(n, &mats)?.with_generators(gens)
    }

    pub(crate) fn from_parts(n: usize, basis: DMatrix<f64>, generators: Vec<DVector<f64>>, expr: Option<ConeExpr>) -> Self {
        SpectrahedralCone { n, basis, generators, expr }
    }

    /// Attaches a rank-one certificate after checking `xxᵀ ∈ L` for each vector.
    /// Vectors are normalized, sign-fixed and deduplicated as rays.
    pub fn with_generators(mut self, gens: &[DVector<f64>]) -> Result<Self> {
        let mut kept: Vec<DVector<f64>> = Vec::with_capacity(gens.len());
        for g in gens {
            if g.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: g.len() });
            }
            let Some(u) = unit_sign_normalized(g) else { continue };
            let outer = SymMatrix::outer(&u);
            let d = self.dist_to_span(&outer);
            if d > GENERATOR_TOL * outer.norm() {
                return Err(Error::invalid(format!("generator outer product is {d:.3e} away from the span")));
            }
            if !kept.iter().any(|k| same_ray(k, &u)) {
                kept.push(u);
            }
        }
        self.generators = kept;
        Ok(self)
    }

    pub fn with_expr(mut self, expr: ConeExpr) -> Self {
        self.expr = Some(expr);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    pub fn span_basis(&self) -> Vec<SymMatrix> {
        self.basis.column_iter().map(|c| smat(&c.into_owned(), self.n)).collect()
    }

    pub fn generators(&self) -> &[DVector<f64>] {
        &self.generators
    }

    pub fn expr(&self) -> Option<&ConeExpr> {
        self.expr.as_ref()
    }

    /// Orthogonal projection onto L.
    pub fn project(&self, x: &SymMatrix) -> SymMatrix {
        let v = svec(x);
        let c = self.basis.transpose() * &v;
        smat(&(&self.basis * c), self.n)
    }

    pub fn dist_to_span(&self, x: &SymMatrix) -> f64 {
        let v = svec(x);
        let c = self.basis.transpose() * &v;
        (v - &self.basis * c).norm()
    }

    /// Coordinates of `x` in the span basis (after projection).
    pub fn coords(&self, x: &SymMatrix) -> DVector<f64> {
        self.basis.transpose() * svec(x)
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> SymMatrix {
        smat(&(&self.basis * c), self.n)
    }

    pub fn contains_outer(&self, x: &DVector<f64>, tol: f64) -> bool {
        let o = SymMatrix::outer(x);
        self.dist_to_span(&o) <= tol * o.norm().max(f64::MIN_POSITIVE)
    }

    /// Orthonormal basis of the orthogonal complement of L, as symmetric matrices.
    pub fn constraint_forms(&self) -> Vec<SymMatrix> {
        symlin::orthonormal_complement(&self.basis, 1e-10).column_iter().map(|c| smat(&c.into_owned(), self.n)).collect()
    }

    /// True when the generator outer products span L.
    pub fn certificate_complete(&self) -> bool {
        if self.generators.is_empty() {
            return self.dimension() == 0;
        }
        let cols: Vec<DVector<f64>> = self.generators.iter().map(|g| svec(&SymMatrix::outer(g))).collect();
        col_span(&DMatrix::from_columns(&cols), SPAN_TOL).ncols() >= self.dimension()
    }

    /// Image `{A X Aᵀ : X ∈ K}` under an invertible `A`.
    pub fn congruence(&self, a: &DMatrix<f64>) -> Result<SpectrahedralCone> {
        if a.nrows() != self.n || a.ncols() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: a.nrows() });
        }
        let inv = a.clone().try_inverse().ok_or_else(|| Error::invalid("congruence matrix is singular"))?;
        let mats: Vec<SymMatrix> = self.span_basis().iter().map(|b| b.congruence(a)).collect();
        let gens: Vec<DVector<f64>> = self.generators.iter().map(|g| a * g).collect();
        let mut out = SpectrahedralCone::from_span(self.n, &mats)?.with_generators(&gens)?;
        out.expr = self.expr.clone().map(|e| ConeExpr::Congruence {
            child: Box::new(e),
            forward: Rows(a.clone()),
            inverse: Rows(inv),
        });
        Ok(out)
    }
}

/// `X ∈ L` to `tol·(1+‖X‖)` and `X ⪰ 0`.
pub fn membership(k: &SpectrahedralCone, x: &SymMatrix, tol: f64) -> Result<bool> {
    if x.n() != k.n {
        return Err(Error::DimensionMismatch { expected: k.n, found: x.n() });
    }
    Ok(k.dist_to_span(x) <= tol * (1.0 + x.norm()) && symlin::psd_check(x, tol))
}

/// Maximal rank in the cone, read off the certificate.
pub fn degree(k: &SpectrahedralCone) -> Result<usize> {
    if k.generators.is_empty() {
        return Err(Error::MissingCertificate);
    }
    let mut s = DMatrix::zeros(k.n, k.n);
    for g in &k.generators {
        s += g * g.transpose();
    }
    Ok(symlin::numeric_rank(&SymMatrix::symmetrize(s), DEFAULT_TOL))
}

pub fn dimension(k: &SpectrahedralCone) -> usize {
    k.dimension()
}

/// Isomorphic copy of size `degree(K)` with a positive definite element,
/// plus the `n×m` embedding `U` with `X = U X' Uᵀ`.
pub fn reduce_nondegenerate(k: &SpectrahedralCone) -> Result<(SpectrahedralCone, DMatrix<f64>)> {
    if k.generators.is_empty() {
        return Err(Error::MissingCertificate);
    }
    let n = k.n;
    let mut s = DMatrix::zeros(n, n);
    for g in &k.generators {
        s += g * g.transpose();
    }
    let e = symlin::eig_sym(&SymMatrix::symmetrize(s))?;
    let u = e.image(DEFAULT_TOL);
    let m = u.ncols();
    if m == n {
        return Ok((k.clone(), DMatrix::identity(n, n)));
    }
    let ut = u.transpose();
    let mats: Vec<SymMatrix> = k.span_basis().iter().map(|b| b.congruence(&ut)).collect();
    let gens: Vec<DVector<f64>> = k.generators.iter().map(|g| &ut * g).collect();
    let mut out = SpectrahedralCone::from_span(m, &mats)?.with_generators(&gens)?;
    out.expr = k.expr.clone().map(|ex| ConeExpr::Congruence {
        child: Box::new(ex),
        forward: Rows(ut.clone()),
        inverse: Rows(u.clone()),
    });
    Ok((out, u))
}

/// Span of `L ∩ L_n(H)` in svec coordinates.
pub(crate) fn face_span(k: &SpectrahedralCone, h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.n;
    let r = h.ncols();
    let p = svec_len(n);
    if r == 0 {
        return DMatrix::zeros(p, 0);
    }
    // X = H Y Hᵀ, Y ∈ S^r; constrain (I − P_L) svec(X) = 0.
    let q = svec_len(r);
    let mut lift = DMatrix::zeros(p, q);
    for j in 0..q {
        let mut e = DVector::zeros(q);
        e[j] = 1.0;
        let y = smat(&e, r);
        lift.set_column(j, &svec(&SymMatrix::symmetrize(h * y.matrix() * h.transpose())));
    }
    let proj = &k.basis * (k.basis.transpose() * &lift);
    let resid = &lift - proj;
    let ns = null_space_scaled(&resid, 1e-9, 1.0);
    if ns.ncols() == 0 {
        return DMatrix::zeros(p, 0);
    }
    col_span(&(&lift * ns), SPAN_TOL)
}

/// The face `K ∩ L_n(H)`. Its certificate is the set of generators lying in H,
/// enriched by decomposing relative-interior elements when the cone has an expression.
pub fn face_of(k: &SpectrahedralCone, h: &FaceHandle) -> Result<SpectrahedralCone> {
    if h.ambient() != k.n {
        return Err(Error::DimensionMismatch { expected: k.n, found: h.ambient() });
    }
    let basis = face_span(k, h.basis());
    let gens: Vec<DVector<f64>> = k.generators.iter().filter(|g| h.contains(g)).cloned().collect();
    let mut face = SpectrahedralCone::from_parts(k.n, basis, Vec::new(), k.expr.clone()).with_generators(&gens)?;
    if !face.certificate_complete() && k.expr.is_some() {
        enrich_face_certificate(&mut face, h)?;
    }
    Ok(face)
}

/// Relative-interior element of `K ∩ L_n(H)` (shrinking H to the face's true image if needed)
/// together with its smallest eigenvalue on that image and the image itself.
pub(crate) fn face_interior(k: &SpectrahedralCone, h: &DMatrix<f64>) -> Result<Option<(SymMatrix, f64, DMatrix<f64>)>> {
    let n = k.n;
    let mut h = h.clone();
    for _ in 0..=n {
        let span = face_span(k, &h);
        let mats: Vec<SymMatrix> = (0..span.ncols()).map(|j| smat(&span.column(j).into_owned(), n)).collect();
        let local: Vec<DMatrix<f64>> = mats.iter().map(|m| h.transpose() * m.matrix() * &h).collect();
        let Some((c, smin)) = crate::sdp::max_min_eigenvalue(&local)? else { return Ok(None) };
        let x = mats.iter().zip(c.iter()).fold(SymMatrix::zeros(n), |acc, (m, ci)| acc.add(&m.scale(*ci)));
        if smin > 1e-9 {
            return Ok(Some((x, smin, h)));
        }
        let img = symlin::eig(&SymMatrix::symmetrize(h.transpose() * x.matrix() * &h)).image_rel(1e-6);
        if img.ncols() == 0 || img.ncols() == h.ncols() {
            return Ok(None);
        }
        h = &h * img;
    }
    Ok(None)
}

fn enrich_face_certificate(face: &mut SpectrahedralCone, h: &FaceHandle) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let Some((base, lmin, _)) = face_interior(face, h.basis())? else { return Ok(()) };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_face);
    for round in 0..(2 * face.dimension() + 4) {
        if face.certificate_complete() {
            break;
        }
        let x = if round == 0 {
            base.clone()
        } else {
            let c = DVector::from_fn(face.dimension(), |_, _| rng.gen_range(-1.0..1.0));
            let d = face.from_coords(&c);
            base.add(&d.scale(0.5 * lmin / d.norm().max(1e-300)))
        };
        let dec = crate::decompose::carath_decompose(face, &x)?;
        let mut gens = face.generators.clone();
        gens.extend(dec.atoms.iter().map(|a| a.vector.clone()));
        *face = face.clone().with_generators(&gens)?;
    }
    Ok(())
}

/// Tangent directions at a rank-one element: `{y : xyᵀ + yxᵀ ∈ L}` (contains x).
pub fn tangent_space(k: &SpectrahedralCone, x: &DVector<f64>) -> DMatrix<f64> {
    let n = k.n;
    let p = svec_len(n);
    let mut m = DMatrix::zeros(p, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        m.set_column(j, &svec(&SymMatrix::sym_outer(x, &e)));
    }
    let resid = &m - &k.basis * (k.basis.transpose() * &m);
    null_space_scaled(&resid, 1e-9, x.norm())
}

/// Whether some y independent of x has `xyᵀ + yxᵀ ∈ L`.
pub fn has_tangent(k: &SpectrahedralCone, x: &DVector<f64>) -> bool {
    tangent_space(k, x).ncols() >= 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build, chordal_cone, hankel_cone, ChordalGraph};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn membership_examples() {
        let tri3 = build(&ConeExpr::Tridiag { n: 3 }).unwrap();
        assert!(membership(&tri3, &SymMatrix::identity(3), DEFAULT_TOL).unwrap());
        let ones = SymMatrix::symmetrize(DMatrix::from_element(3, 3, 1.0));
        assert!(!membership(&tri3, &ones, DEFAULT_TOL).unwrap());
        let han3 = hankel_cone(3, 1).unwrap();
        let x = SymMatrix::outer(&v(&[1.0, 1.0, 1.0])).add(&SymMatrix::outer(&v(&[1.0, -1.0, 1.0])));
        assert!(membership(&han3, &x, DEFAULT_TOL).unwrap());
        assert!(membership(&han3, &SymMatrix::identity(2), DEFAULT_TOL).is_err());
    }

    #[test]
    fn degree_and_dimension_examples() {
        assert_eq!(degree(&build(&ConeExpr::FullPsd { n: 4 }).unwrap()).unwrap(), 4);
        let han3 = hankel_cone(3, 1).unwrap();
        assert_eq!(degree(&han3).unwrap(), 3);
        assert_eq!(dimension(&han3), 5);
        assert_eq!(dimension(&hankel_cone(2, 2).unwrap()), 9);
        let uncertified = SpectrahedralCone::from_constraints(2, &[]).unwrap();
        assert!(matches!(degree(&uncertified), Err(Error::MissingCertificate)));
    }

    #[test]
    fn reduce_examples() {
        let full = build(&ConeExpr::FullPsd { n: 3 }).unwrap();
        let (r, u) = reduce_nondegenerate(&full).unwrap();
        assert_eq!(r.n(), 3);
        assert_eq!(u, DMatrix::identity(3, 3));

        // diagonal cone on the first two coordinates, padded into S^3
        let gens = [v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])];
        let k = SpectrahedralCone::from_generators(3, &gens).unwrap();
        let (r, u) = reduce_nondegenerate(&k).unwrap();
        assert_eq!((r.n(), u.ncols()), (2, 2));
        for g in r.generators() {
            let back = &u * g;
            assert!(k.generators().iter().any(|h| same_ray(h, &back)));
        }

        let ray = SpectrahedralCone::from_generators(5, &[v(&[1.0, 2.0, 0.0, -1.0, 0.5])]).unwrap();
        let (r, _) = reduce_nondegenerate(&ray).unwrap();
        assert_eq!((r.n(), r.dimension()), (1, 1));
    }

    #[test]
    fn face_examples() {
        let tri4 = build(&ConeExpr::Tridiag { n: 4 }).unwrap();
        let f = face_of(&tri4, &FaceHandle::full(4)).unwrap();
        assert_eq!(f.dimension(), 7);
        let f = face_of(&tri4, &FaceHandle::coordinates(4, &[0, 1, 2])).unwrap();
        assert_eq!(f.dimension(), 5);
        assert!(f.certificate_complete());
        let s3 = build(&ConeExpr::FullPsd { n: 3 }).unwrap();
        let f = face_of(&s3, &FaceHandle::coordinates(3, &[0, 1])).unwrap();
        assert_eq!(f.dimension(), 3);
        assert!(f.certificate_complete());
    }

    #[test]
    fn face_of_hankel_is_enriched_to_a_complete_certificate() {
        let han = hankel_cone(4, 1).unwrap();
        let t1: f64 = 0.37;
        let t2: f64 = -1.9;
        let m1 = v(&[1.0, t1, t1 * t1, t1 * t1 * t1]);
        let m2 = v(&[1.0, t2, t2 * t2, t2 * t2 * t2]);
        let h = FaceHandle::from_vectors(4, &[m1.clone(), m2.clone()]);
        let f = face_of(&han, &h).unwrap();
        // the cross term of two moment vectors is not Hankel, so the face is two rays
        assert_eq!(f.dimension(), 2);
        assert!(f.certificate_complete());
        let t3: f64 = 1.4;
        let m3 = v(&[1.0, t3, t3 * t3, t3 * t3 * t3]);
        let h = FaceHandle::from_vectors(4, &[m1, m2, m3]);
        let f = face_of(&han, &h).unwrap();
        assert_eq!(f.dimension(), 3);
        assert!(f.certificate_complete());
    }

    #[test]
    fn tangent_diagnostic() {
        let diag = build(&ConeExpr::Diagonal { n: 3 }).unwrap();
        assert!(!has_tangent(&diag, &v(&[1.0, 0.0, 0.0])));
        let s2 = build(&ConeExpr::FullPsd { n: 2 }).unwrap();
        assert!(has_tangent(&s2, &v(&[1.0, 0.0])));
        let g = ChordalGraph::new(3, &[(0, 1)]).unwrap();
        let k = chordal_cone(&g).unwrap();
        assert!(!has_tangent(&k, &v(&[0.0, 0.0, 1.0])));
    }
}
