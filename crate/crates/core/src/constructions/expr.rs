use crate::constructions::chordal::ChordalGraph;
use crate::error::{Error, Result};
use crate::symlin::SymMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Dense matrix serialized as a list of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Rows(pub DMatrix<f64>);

impl TryFrom<Vec<Vec<f64>>> for Rows {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        Ok(Rows(DMatrix::from_fn(r, c, |i, j| rows[i][j])))
    }
}

impl From<Rows> for Vec<Vec<f64>> {
    fn from(m: Rows) -> Self {
        m.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Shared full face for an intertwining: `iota1` (n1×k) and `iota2` (n2×k)
/// have full column rank and span faces of the two children isomorphic to `S^k_+`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueSpec {
    pub iota1: Rows,
    pub iota2: Rows,
}

impl GlueSpec {
    pub fn new(iota1: DMatrix<f64>, iota2: DMatrix<f64>) -> Self {
        GlueSpec { iota1: Rows(iota1), iota2: Rows(iota2) }
    }

    /// Rank-one glue along `e_i` of the first child and `e_j` of the second.
    pub fn coordinate(n1: usize, i: usize, n2: usize, j: usize) -> Self {
        let mut a = DMatrix::zeros(n1, 1);
        a[(i, 0)] = 1.0;
        let mut b = DMatrix::zeros(n2, 1);
        b[(j, 0)] = 1.0;
        GlueSpec::new(a, b)
    }

    pub fn rank(&self) -> usize {
        self.iota1.0.ncols()
    }
}

/// Construction tree of a cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeExpr {
    FullPsd { n: usize },
    Diagonal { n: usize },
    Hankel { n: usize, m: usize },
    Tridiag { n: usize },
    Chordal { graph: ChordalGraph },
    Codim1 { q: SymMatrix },
    TernaryQuartic,
    CrossRatio { angles: [f64; 4] },
    /// Moment cone spanned by the outer products of the listed vectors.
    MomentCone { vectors: Vec<Vec<f64>> },
    BlockToeplitz { n: usize, m: usize },
    DirectSum { children: Vec<ConeExpr> },
    FullExtension { child: Box<ConeExpr>, n: usize },
    Intertwining { first: Box<ConeExpr>, second: Box<ConeExpr>, glue: GlueSpec },
    /// `{F X Fᵀ : X ∈ child}` with `inverse·forward = I` on the child's span.
    Congruence { child: Box<ConeExpr>, forward: Rows, inverse: Rows },
}

impl ConeExpr {
    /// Ambient matrix size.
    pub fn size(&self) -> usize {
        match self {
            ConeExpr::FullPsd { n } | ConeExpr::Diagonal { n } | ConeExpr::Tridiag { n } => *n,
            ConeExpr::Hankel { n, m } | ConeExpr::BlockToeplitz { n, m } => n * m,
            ConeExpr::Chordal { graph } => graph.n(),
            ConeExpr::Codim1 { q } => q.n(),
            ConeExpr::TernaryQuartic | ConeExpr::CrossRatio { .. } => 6,
            ConeExpr::MomentCone { vectors } => vectors.first().map_or(0, Vec::len),
            ConeExpr::DirectSum { children } => children.iter().map(ConeExpr::size).sum(),
            ConeExpr::FullExtension { n, .. } => *n,
            ConeExpr::Intertwining { first, second, glue } => first.size() + second.size() - glue.rank(),
            ConeExpr::Congruence { forward, .. } => forward.0.nrows(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConeExpr::FullPsd { .. } => "full_psd",
            ConeExpr::Diagonal { .. } => "diagonal",
            ConeExpr::Hankel { .. } => "hankel",
            ConeExpr::Tridiag { .. } => "tridiag",
            ConeExpr::Chordal { .. } => "chordal",
            ConeExpr::Codim1 { .. } => "codim1",
            ConeExpr::TernaryQuartic => "ternary_quartic",
            ConeExpr::CrossRatio { .. } => "cross_ratio",
            ConeExpr::MomentCone { .. } => "moment_cone",
            ConeExpr::BlockToeplitz { .. } => "block_toeplitz",
            ConeExpr::DirectSum { .. } => "direct_sum",
            ConeExpr::FullExtension { .. } => "full_extension",
            ConeExpr::Intertwining { .. } => "intertwining",
            ConeExpr::Congruence { .. } => "congruence",
        }
    }

    /// Checks sizes at every combinator node.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConeExpr::FullPsd { n } | ConeExpr::Diagonal { n } | ConeExpr::Tridiag { n } if *n == 0 => {
                Err(Error::invalid("cone size must be positive"))
            }
            ConeExpr::Hankel { n, m } | ConeExpr::BlockToeplitz { n, m } if *n == 0 || *m == 0 => {
                Err(Error::invalid("block sizes must be positive"))
            }
            ConeExpr::MomentCone { vectors } => {
                let len = vectors.first().map(Vec::len).ok_or_else(|| Error::invalid("no sample vectors"))?;
                if len == 0 || vectors.iter().any(|v| v.len() != len) {
                    return Err(Error::invalid("sample vectors must share a positive length"));
                }
                Ok(())
            }
            ConeExpr::DirectSum { children } => {
                if children.is_empty() {
                    return Err(Error::invalid("direct sum needs at least one child"));
                }
                children.iter().try_for_each(ConeExpr::validate)
            }
            ConeExpr::FullExtension { child, n } => {
                child.validate()?;
                if *n <= child.size() {
                    return Err(Error::invalid(format!(
                        "full extension size {n} must exceed child size {}",
                        child.size()
                    )));
                }
                Ok(())
            }
            ConeExpr::Intertwining { first, second, glue } => {
                first.validate()?;
                second.validate()?;
                let (a, b) = (&glue.iota1.0, &glue.iota2.0);
                if a.nrows() != first.size() || b.nrows() != second.size() || a.ncols() != b.ncols() {
                    return Err(Error::InvalidGlue("glue shapes do not match the children".into()));
                }
                if glue.rank() == 0 {
                    return Err(Error::InvalidGlue("rank-0 glue; use a direct sum".into()));
                }
                Ok(())
            }
            ConeExpr::Congruence { child, forward, inverse } => {
                child.validate()?;
                let c = child.size();
                if forward.0.ncols() != c || inverse.0.nrows() != c || inverse.0.ncols() != forward.0.nrows() {
                    return Err(Error::invalid("congruence frame shapes do not match the child"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
