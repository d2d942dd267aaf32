//! Homogeneous quadratically constrained problems
//!
//! ```text
//! min xᵀSx  s.t.  xᵀA_i x = 0,  xᵀBx = 1
//! ```
//!
//! their semidefinite relaxation over `K = {X ⪰ 0 : ⟨A_i,X⟩ = 0}` and rank-one extraction.

mod certify;
mod solve;

pub use certify::{certify_exactness, purify, CertifyOptions, ExactnessCertificate, ExactnessStatus, Purified};
pub use solve::{solve_relaxation, SdpSolution, SdpStatus};

use crate::cone_model::SpectrahedralCone;
use crate::constructions::{build, ChordalGraph, ConeExpr};
use crate::error::{Error, Result};
use crate::symlin::SymMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "QcqpJson", into = "QcqpJson")]
pub struct QcqpProblem {
    s: SymMatrix,
    b: SymMatrix,
    a: Vec<SymMatrix>,
    cone: Option<SpectrahedralCone>,
}

#[derive(Serialize, Deserialize)]
struct QcqpJson {
    #[serde(rename = "S")]
    s: SymMatrix,
    #[serde(rename = "B")]
    b: SymMatrix,
    #[serde(rename = "A", default)]
    a: Vec<SymMatrix>,
    /// Optional cone with the same span carrying a construction tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone: Option<SpectrahedralCone>,
}

impl TryFrom<QcqpJson> for QcqpProblem {
    type Error = Error;
    fn try_from(j: QcqpJson) -> Result<Self> {
        let p = QcqpProblem::new(j.s, j.b, j.a)?;
        match j.cone {
            Some(k) => p.with_cone(k),
            None => Ok(p),
        }
    }
}

impl From<QcqpProblem> for QcqpJson {
    fn from(p: QcqpProblem) -> Self {
        QcqpJson { s: p.s, b: p.b, a: p.a, cone: p.cone }
    }
}

impl QcqpProblem {
    pub fn new(s: SymMatrix, b: SymMatrix, a: Vec<SymMatrix>) -> Result<Self> {
        let n = s.n();
        for m in std::iter::once(&b).chain(a.iter()) {
            if m.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.n() });
            }
        }
        Ok(QcqpProblem { s, b, a, cone: None })
    }

    /// Problem whose constraints cut out the span of `k`; the cone is kept for its certificate.
    pub fn over_cone(k: &SpectrahedralCone, s: SymMatrix, b: SymMatrix) -> Result<Self> {
        QcqpProblem::new(s, b, k.constraint_forms())?.with_cone(k.clone())
    }

    /// Attaches a cone after checking that its span is `{X : ⟨A_i,X⟩ = 0}`.
    pub fn with_cone(mut self, k: SpectrahedralCone) -> Result<Self> {
        let induced = SpectrahedralCone::from_constraints(self.n(), &self.a)?;
        if k.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: k.n() });
        }
        if !same_span(&induced, &k) {
            return Err(Error::invalid("attached cone does not match the constraint forms"));
        }
        self.cone = Some(k);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn cost(&self) -> &SymMatrix {
        &self.s
    }

    pub fn normalization(&self) -> &SymMatrix {
        &self.b
    }

    pub fn constraints(&self) -> &[SymMatrix] {
        &self.a
    }

    pub fn cone(&self) -> Option<&SpectrahedralCone> {
        self.cone.as_ref()
    }

    /// Largest `|xᵀA_i x| / ‖A_i‖` and `|xᵀBx − 1|`.
    pub fn infeasibility(&self, x: &nalgebra::DVector<f64>) -> f64 {
        let q = |m: &SymMatrix| (x.transpose() * m.matrix() * x)[(0, 0)];
        let hom = self.a.iter().map(|m| q(m).abs() / m.norm().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        hom.max((q(&self.b) - 1.0).abs())
    }

    pub fn value_at(&self, x: &nalgebra::DVector<f64>) -> f64 {
        (x.transpose() * self.s.matrix() * x)[(0, 0)]
    }
}

fn same_span(a: &SpectrahedralCone, b: &SpectrahedralCone) -> bool {
    a.dimension() == b.dimension() && b.span_basis().iter().all(|m| a.dist_to_span(m) <= 1e-8 * m.norm().max(1.0))
}

/// Off-diagonal pair `(i, j)` if `m` is supported exactly on it.
fn pattern_pair(m: &SymMatrix) -> Option<(usize, usize)> {
    let n = m.n();
    let scale = m.norm();
    let mut hit = None;
    for i in 0..n {
        for j in i..n {
            if m.get(i, j).abs() > 1e-12 * scale {
                if i == j || hit.is_some() {
                    return None;
                }
                hit = Some((i, j));
            }
        }
    }
    hit
}

/// Chordal graph whose non-edges are exactly the constrained entries, if the forms have that shape.
fn chordal_pattern(n: usize, forms: &[SymMatrix]) -> Option<ChordalGraph> {
    let mut zero = vec![vec![false; n]; n];
    for m in forms {
        let (i, j) = pattern_pair(m)?;
        zero[i][j] = true;
    }
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| !zero[i][j]).collect();
    ChordalGraph::new(n, &edges).ok()
}

/// The cone `{X ⪰ 0 : ⟨A_i,X⟩ = 0}`. An attached cone is returned as is; entry-zero patterns of a
/// chordal graph get the graph's construction tree.
pub fn induced_cone(p: &QcqpProblem) -> Result<SpectrahedralCone> {
    if let Some(k) = &p.cone {
        return Ok(k.clone());
    }
    let k = SpectrahedralCone::from_constraints(p.n(), &p.a)?;
    if let Some(g) = chordal_pattern(p.n(), &p.a) {
        let ck = build(&ConeExpr::Chordal { graph: g })?;
        if same_span(&k, &ck) {
            return Ok(ck);
        }
    }
    Ok(k)
}

fn expr_is_rog(e: &ConeExpr) -> bool {
    match e {
        ConeExpr::MomentCone { .. } | ConeExpr::BlockToeplitz { .. } => false,
        ConeExpr::DirectSum { children } => children.iter().all(expr_is_rog),
        ConeExpr::FullExtension { child, .. } | ConeExpr::Congruence { child, .. } => expr_is_rog(child),
        ConeExpr::Intertwining { first, second, .. } => expr_is_rog(first) && expr_is_rog(second),
        _ => true,
    }
}

/// Whether the cone comes from a construction tree known to be rank-one generated.
pub fn certified_rog(k: &SpectrahedralCone) -> bool {
    k.expr().is_some_and(expr_is_rog)
}
