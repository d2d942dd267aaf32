use super::completion::{rank1_complete_signs, Completion, PartialMatrix, Violation};
use super::cross::{generator_planes, plane_meet, plane_star_invariant, same_s4_orbit};
use crate::cone_model::{degree, face_span, same_ray, simplicity_partition, tangent_space, SpectrahedralCone};
use crate::constructions::Rows;
use crate::error::{Error, Result};
use crate::symlin::{col_span, eig, null_space_scaled, svec_len, SymMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Congruence `X ↦ S X Sᵀ` with the generator pairs it was verified on.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoWitness {
    #[serde(rename = "S")]
    pub s: Rows,
    pub sigma: Vec<f64>,
    /// `[i, j]`: generator i of the source is sent to ±generator j of the target.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<[usize; 2]>,
}

impl IsoWitness {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s.0
    }

    /// Largest `‖y_j − σ S x_i‖` over the pairs (index-wise when `pairs` is empty).
    pub fn pair_error(&self, xs: &[DVector<f64>], ys: &[DVector<f64>]) -> f64 {
        self.each_pair(xs.len())
            .map(|(k, i, j)| (&ys[j] - (&self.s.0 * &xs[i]) * self.sigma[k]).norm())
            .fold(0.0, f64::max)
    }

    /// As `pair_error` after normalising both `y_j` and `S x_i`; the natural measure for
    /// unit-length certificates, where only rays are matched.
    pub fn ray_error(&self, xs: &[DVector<f64>], ys: &[DVector<f64>]) -> f64 {
        self.each_pair(xs.len())
            .map(|(k, i, j)| {
                let sx = &self.s.0 * &xs[i];
                (ys[j].normalize() - sx.normalize() * self.sigma[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    fn each_pair(&self, m: usize) -> Box<dyn Iterator<Item = (usize, usize, usize)> + '_> {
        if self.pairs.is_empty() {
            Box::new((0..m.min(self.sigma.len())).map(|i| (i, i, i)))
        } else {
            Box::new(self.pairs.iter().enumerate().map(|(k, p)| (k, p[0], p[1])))
        }
    }
}

fn check_lists(x: &[DVector<f64>], y: &[DVector<f64>]) -> Result<usize> {
    let n = x.first().map(|v| v.len()).ok_or_else(|| Error::invalid("empty generator list"))?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    for v in x.iter().chain(y) {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    Ok(n)
}

/// Greedy choice of indices whose columns form a basis.
fn independent_prefix(x: &[DVector<f64>], n: usize) -> Option<Vec<usize>> {
    let mut idx = Vec::new();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for (i, v) in x.iter().enumerate() {
        let mut r = v.clone();
        for b in &basis {
            r -= b * b.dot(&r);
        }
        if r.norm() > 1e-9 * v.norm().max(1e-300) {
            basis.push(r.normalize());
            idx.push(i);
            if idx.len() == n {
                return Some(idx);
            }
        }
    }
    None
}

/// Congruence `S` with `y_i = σ_i S x_i`, recovered from index-matched generator lists.
///
/// Replacing basis column `b` by column `k` changes `det X_B` by the factor `(X_B⁻¹X)_{bk}`,
/// so `|M′| = |M|` entrywise is the determinant compatibility condition on these subsets;
/// a failure reports the offending subset.
pub fn reconstruct_isomorphism(x: &[DVector<f64>], y: &[DVector<f64>]) -> Result<IsoWitness> {
    let n = check_lists(x, y)?;
    let basis = independent_prefix(x, n).ok_or_else(|| Error::invalid("source generators do not span R^n"))?;
    let xb = DMatrix::from_columns(&basis.iter().map(|&i| x[i].clone()).collect::<Vec<_>>());
    let yb = DMatrix::from_columns(&basis.iter().map(|&i| y[i].clone()).collect::<Vec<_>>());
    let xb_inv = xb.clone().try_inverse().ok_or_else(|| Error::numerical("singular source basis"))?;
    let yb_inv = yb.clone().try_inverse().ok_or_else(|| Error::Incompatible { indices: basis.clone() })?;
    let m = &xb_inv * DMatrix::from_columns(x);
    let mp = &yb_inv * DMatrix::from_columns(y);
    let scale = m.amax().max(mp.amax());
    let mut entries = Vec::new();
    for r in 0..n {
        for k in 0..x.len() {
            let (a, b) = (m[(r, k)], mp[(r, k)]);
            let small_a = a.abs() <= 1e-9 * scale;
            let small_b = b.abs() <= 1e-9 * scale;
            if small_a && small_b {
                continue;
            }
            let mut swapped = basis.clone();
            swapped[r] = k;
            if small_a != small_b || (a.abs() - b.abs()).abs() > 1e-7 * a.abs().max(b.abs()) {
                return Err(Error::Incompatible { indices: swapped });
            }
            entries.push((r, k, if a * b > 0.0 { 1.0 } else { -1.0 }));
        }
    }
    let pattern = PartialMatrix::new(n, x.len(), entries)?;
    let (e, f) = match rank1_complete_signs(&pattern)? {
        Completion::Feasible { e, f } => (e, f),
        Completion::Infeasible { violation } => {
            let mut idx: Vec<usize> = match violation {
                Violation::Cycle { cells, .. } => cells.iter().map(|c| c[1]).collect(),
                Violation::ZeroEntry { j, .. } => vec![j],
            };
            idx.sort_unstable();
            idx.dedup();
            return Err(Error::Incompatible { indices: idx });
        }
    };
    let s = &yb * DMatrix::from_diagonal(&DVector::from_vec(e)) * &xb_inv;
    let w = IsoWitness { s: Rows(s), sigma: f, pairs: Vec::new() };
    let tol = 1e-7 * (1.0 + y.iter().map(|v| v.norm()).fold(0.0, f64::max));
    if w.pair_error(x, y) > tol {
        return Err(Error::numerical("reconstructed congruence misses a generator"));
    }
    Ok(w)
}

/// Result of comparing two cones.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum IsoOutcome {
    Isomorphic { witness: IsoWitness },
    NotIsomorphic { reason: String },
    Inconclusive { reason: String },
}

const MAX_CANDIDATES: usize = 10_000;
const MAX_NODES: usize = 2_000_000;

fn check_input(k: &SpectrahedralCone) -> Result<()> {
    if k.generators().is_empty() || !k.certificate_complete() {
        return Err(Error::MissingCertificate);
    }
    if degree(k)? != k.n() {
        return Err(Error::Degenerate);
    }
    Ok(())
}

/// Signature `(p, q, z)` of the form cutting out a codimension-one span, normalised to `p ≥ q`.
pub fn codim1_signature(k: &SpectrahedralCone) -> Option<(usize, usize, usize)> {
    let n = k.n();
    if svec_len(n) != k.dimension() + 1 {
        return None;
    }
    let q = k.constraint_forms().into_iter().next()?;
    let ev = eig(&q).values;
    let cut = 1e-9 * ev.amax();
    let p = ev.iter().filter(|&&v| v > cut).count();
    let m = ev.iter().filter(|&&v| v < -cut).count();
    Some((p.max(m), p.min(m), n - p - m))
}

fn partition_profile(k: &SpectrahedralCone) -> Result<Vec<(usize, usize)>> {
    let mut prof: Vec<(usize, usize)> =
        simplicity_partition(k)?.iter().map(|h| (h.dim(), face_span(k, h.basis()).ncols())).collect();
    prof.sort_unstable();
    Ok(prof)
}

fn fmt_sig(s: (usize, usize, usize)) -> String {
    format!("({}{}{})", "+".repeat(s.0), "−".repeat(s.1), "0".repeat(s.2))
}

/// Invariant-based rejection, `Some(reason)` when the cones are certainly not isomorphic.
fn invariant_mismatch(k1: &SpectrahedralCone, k2: &SpectrahedralCone) -> Result<Option<String>> {
    if k1.n() != k2.n() {
        return Ok(Some(format!("degrees differ: {} vs {}", k1.n(), k2.n())));
    }
    if k1.dimension() != k2.dimension() {
        return Ok(Some(format!("dimensions differ: {} vs {}", k1.dimension(), k2.dimension())));
    }
    if let (Some(a), Some(b)) = (codim1_signature(k1), codim1_signature(k2)) {
        if a != b {
            return Ok(Some(format!("codimension-1 signatures differ: {} vs {}", fmt_sig(a), fmt_sig(b))));
        }
    }
    let (p1, p2) = (partition_profile(k1)?, partition_profile(k2)?);
    if p1 != p2 {
        return Ok(Some(format!("simple factors differ: {p1:?} vs {p2:?}")));
    }
    if let (Some(a), Some(b)) = (plane_star_invariant(k1), plane_star_invariant(k2)) {
        if !same_s4_orbit(a, b) {
            return Ok(Some(format!("cross-ratio orbits differ: {a:.12} vs {b:.12}")));
        }
    }
    Ok(None)
}

/// Decides isomorphism by invariants, then searches for a congruence matching rays of the
/// two certificates. An exhausted search is reported as inconclusive.
pub fn cones_isomorphic(k1: &SpectrahedralCone, k2: &SpectrahedralCone) -> Result<IsoOutcome> {
    check_input(k1)?;
    check_input(k2)?;
    if let Some(reason) = invariant_mismatch(k1, k2)? {
        return Ok(IsoOutcome::NotIsomorphic { reason });
    }
    let mut m = Matcher::new(k1, k2);
    let found = m.search();
    match found {
        Some(s) => Ok(IsoOutcome::Isomorphic { witness: witness_from(k1, k2, s) }),
        None if m.leaves >= MAX_CANDIDATES || m.nodes >= MAX_NODES => Ok(IsoOutcome::Inconclusive {
            reason: format!("matching search capped after {} candidates", m.leaves),
        }),
        None => Ok(IsoOutcome::Inconclusive {
            reason: format!("no ray matching of the certificates works ({} candidates tried)", m.leaves),
        }),
    }
}

fn witness_from(k1: &SpectrahedralCone, k2: &SpectrahedralCone, s: DMatrix<f64>) -> IsoWitness {
    let mut pairs = Vec::new();
    let mut sigma = Vec::new();
    for (i, x) in k1.generators().iter().enumerate() {
        let sx = (&s * x).normalize();
        if let Some((j, y)) = k2.generators().iter().enumerate().find(|(_, y)| same_ray(&sx, &y.normalize())) {
            pairs.push([i, j]);
            sigma.push(if sx.dot(y) >= 0.0 { 1.0 } else { -1.0 });
        }
    }
    IsoWitness { s: Rows(s), sigma, pairs }
}

/// Whether `S L₁ Sᵀ = L₂` (dimensions already agree) and `S` is invertible.
pub fn maps_span_onto(s: &DMatrix<f64>, k1: &SpectrahedralCone, k2: &SpectrahedralCone) -> bool {
    if k1.dimension() != k2.dimension() || s.nrows() != k1.n() || s.ncols() != k2.n() {
        return false;
    }
    let sv = crate::symlin::svd(s).singular_values;
    if sv.min() <= 1e-10 * sv.max() {
        return false;
    }
    k1.span_basis().iter().all(|b| {
        let img = b.congruence(s);
        k2.dist_to_span(&img) <= 1e-7 * img.norm().max(f64::MIN_POSITIVE)
    })
}

struct Side {
    rays: Vec<DVector<f64>>,
    profile: Vec<usize>,
    /// `adj[a][b]`: the symmetric product of rays a and b lies in the span.
    adj: Vec<Vec<bool>>,
    /// Rays met by two certificate planes; listed first in `rays`.
    lines: usize,
}

impl Side {
    fn new(k: &SpectrahedralCone) -> Self {
        let mut rays: Vec<DVector<f64>> = Vec::new();
        let push = |rays: &mut Vec<DVector<f64>>, v: DVector<f64>| {
            let v = v.normalize();
            if !rays.iter().any(|r| same_ray(r, &v)) {
                rays.push(v);
            }
        };
        if let Some(planes) = generator_planes(k, 24) {
            for i in 0..planes.len() {
                for j in (i + 1)..planes.len() {
                    if let Some(l) = plane_meet(&planes[i], &planes[j]) {
                        push(&mut rays, l);
                    }
                }
            }
        }
        let lines = rays.len();
        for g in k.generators() {
            push(&mut rays, g.clone());
        }
        let profile = rays.iter().map(|r| tangent_space(k, r).ncols()).collect();
        let adj = rays
            .iter()
            .map(|a| {
                rays.iter()
                    .map(|b| {
                        let s = SymMatrix::sym_outer(a, b);
                        k.dist_to_span(&s) <= 1e-7 * s.norm()
                    })
                    .collect()
            })
            .collect();
        Side { rays, profile, adj, lines }
    }
}

/// Rows of the linear conditions `(I − yyᵀ) S x = 0` on `vec(S)` (column-major).
fn dlt_rows(x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let p = DMatrix::identity(n, n) - y * y.transpose();
    let mut out = DMatrix::zeros(n, n * n);
    for r in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[(r, i + n * j)] = p[(r, i)] * x[j];
            }
        }
    }
    out
}

fn stack(rows: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut out = DMatrix::zeros(total, n * n);
    let mut at = 0;
    for r in rows {
        out.rows_mut(at, r.nrows()).copy_from(r);
        at += r.nrows();
    }
    out
}

fn kernel(rows: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    null_space_scaled(&stack(rows, n), 1e-9, 1.0)
}

struct Matcher<'a> {
    k1: &'a SpectrahedralCone,
    k2: &'a SpectrahedralCone,
    a: Side,
    b: Side,
    frame: Vec<usize>,
    assigned: Vec<usize>,
    used: Vec<bool>,
    rows: Vec<DMatrix<f64>>,
    leaves: usize,
    nodes: usize,
    rng: ChaCha8Rng,
}

impl<'a> Matcher<'a> {
    fn new(k1: &'a SpectrahedralCone, k2: &'a SpectrahedralCone) -> Self {
        let a = Side::new(k1);
        let b = Side::new(k2);
        let frame = choose_frame(&a, k1.n());
        let used = vec![false; b.rays.len()];
        Matcher {
            k1,
            k2,
            a,
            b,
            frame,
            assigned: Vec::new(),
            used,
            rows: Vec::new(),
            leaves: 0,
            nodes: 0,
            rng: ChaCha8Rng::seed_from_u64(0x150_3011),
        }
    }

    fn search(&mut self) -> Option<DMatrix<f64>> {
        let n = self.k1.n();
        if self.assigned.len() == self.frame.len() {
            self.leaves += 1;
            let ns = kernel(&self.rows, n);
            for _ in 0..3 {
                let c = DVector::from_fn(ns.ncols(), |_, _| self.rng.gen_range(-1.0..1.0));
                let v = &ns * c;
                let mut s = DMatrix::from_column_slice(n, n, v.as_slice());
                let nrm = s.norm();
                if nrm == 0.0 {
                    continue;
                }
                s *= (n as f64).sqrt() / nrm;
                if maps_span_onto(&s, self.k1, self.k2) {
                    return Some(s);
                }
                if ns.ncols() == 1 {
                    break;
                }
            }
            return None;
        }
        let t = self.assigned.len();
        let xi = self.frame[t];
        for cand in 0..self.b.rays.len() {
            if self.leaves >= MAX_CANDIDATES || self.nodes >= MAX_NODES {
                return None;
            }
            if self.used[cand] || self.b.profile[cand] != self.a.profile[xi] {
                continue;
            }
            let consistent = (0..t).all(|u| self.a.adj[xi][self.frame[u]] == self.b.adj[cand][self.assigned[u]]);
            if !consistent {
                continue;
            }
            self.nodes += 1;
            self.rows.push(dlt_rows(&self.a.rays[xi], &self.b.rays[cand]));
            if kernel(&self.rows, n).ncols() == 0 {
                self.rows.pop();
                continue;
            }
            self.used[cand] = true;
            self.assigned.push(cand);
            if let Some(s) = self.search() {
                return Some(s);
            }
            self.assigned.pop();
            self.used[cand] = false;
            self.rows.pop();
        }
        None
    }
}

/// Rays of the source that successively cut down the congruences fixing every chosen ray,
/// spanning directions first. Lines shared by planes come first since they are intrinsic.
fn choose_frame(a: &Side, n: usize) -> Vec<usize> {
    let mut frame: Vec<usize> = Vec::new();
    let mut span = DMatrix::zeros(n, 0);
    for i in 0..a.rays.len() {
        let mut cols: Vec<DVector<f64>> = span.column_iter().map(|c| c.into_owned()).collect();
        cols.push(a.rays[i].clone());
        let next = col_span(&DMatrix::from_columns(&cols), 1e-9);
        if next.ncols() > span.ncols() {
            span = next;
            frame.push(i);
        }
        if span.ncols() == n {
            break;
        }
    }
    let mut rows: Vec<DMatrix<f64>> = frame.iter().map(|&i| dlt_rows(&a.rays[i], &a.rays[i])).collect();
    let mut free = kernel(&rows, n).ncols();
    let order: Vec<usize> = (0..a.lines).chain(a.lines..a.rays.len()).collect();
    for i in order {
        if free <= 1 || frame.len() >= 2 * n + 4 {
            break;
        }
        if frame.contains(&i) {
            continue;
        }
        rows.push(dlt_rows(&a.rays[i], &a.rays[i]));
        let f = kernel(&rows, n).ncols();
        if f < free {
            free = f;
            frame.push(i);
        } else {
            rows.pop();
        }
    }
    frame
}
