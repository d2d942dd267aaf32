//! Builders for the cone families and the three combinators.

pub(crate) mod chordal;
mod combinators;
mod expr;
mod families;
mod sampling;
mod toeplitz;

pub use chordal::ChordalGraph;
pub use combinators::{direct_sum, full_extension, intertwine};
pub(crate) use combinators::{frame_image, intertwine_maps};
pub use expr::{ConeExpr, GlueSpec, Rows};
pub use families::{
    chordal_cone, codim1_cone, cross_ratio_cone, cross_ratio_planes, cross_ratio_tree, diagonal_cone,
    full_psd_cone, hankel_cone, moment_cone_from_samples, moment_vector, moment_vector_homogeneous,
    quartic_lift, ternary_quartic_cone, tridiagonal_cone,
};
pub use sampling::{random_member, sample_ray};
pub use toeplitz::{block_toeplitz_cone, is_block_toeplitz, toeplitz_atom, HermitianCone};

use crate::cone_model::SpectrahedralCone;
use crate::error::{Error, Result};

/// Builds the cone of a construction tree, with the tree attached.
pub fn build(expr: &ConeExpr) -> Result<SpectrahedralCone> {
    expr.validate()?;
    let cone = match expr {
        ConeExpr::FullPsd { n } => full_psd_cone(*n)?,
        ConeExpr::Diagonal { n } => diagonal_cone(*n)?,
        ConeExpr::Hankel { n, m } => hankel_cone(*n, *m)?,
        ConeExpr::Tridiag { n } => tridiagonal_cone(*n)?,
        ConeExpr::Chordal { graph } => chordal_cone(graph)?,
        ConeExpr::Codim1 { q } => codim1_cone(q)?,
        ConeExpr::TernaryQuartic => ternary_quartic_cone()?,
        ConeExpr::CrossRatio { angles } => cross_ratio_cone(angles)?,
        ConeExpr::MomentCone { vectors } => families::moment_cone_from_vectors(vectors.clone())?,
        ConeExpr::BlockToeplitz { .. } => {
            return Err(Error::invalid("block-Toeplitz cones are complex; use block_toeplitz_cone"))
        }
        ConeExpr::DirectSum { children } => {
            let mut acc = build(&children[0])?;
            for c in &children[1..] {
                acc = direct_sum(&acc, &build(c)?)?;
            }
            acc
        }
        ConeExpr::FullExtension { child, n } => full_extension(&build(child)?, *n)?,
        ConeExpr::Intertwining { first, second, glue } => intertwine(&build(first)?, &build(second)?, glue)?,
        ConeExpr::Congruence { child, forward, .. } => frame_image(&build(child)?, &forward.0)?,
    };
    Ok(cone.with_expr(expr.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_model::degree;
    use nalgebra::DMatrix;

    #[test]
    fn build_examples() {
        let k = build(&ConeExpr::FullPsd { n: 3 }).unwrap();
        assert_eq!((k.dimension(), degree(&k).unwrap()), (6, 3));
        let ext = ConeExpr::FullExtension { child: Box::new(ConeExpr::Diagonal { n: 2 }), n: 3 };
        assert_eq!(build(&ext).unwrap().dimension(), 5);
        let inter = ConeExpr::Intertwining {
            first: Box::new(ConeExpr::Hankel { n: 3, m: 1 }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::coordinate(3, 2, 2, 0),
        };
        let k = build(&inter).unwrap();
        assert_eq!(k.dimension(), 7);
        assert!(k.certificate_complete());
    }

    #[test]
    fn ill_typed_trees_are_rejected() {
        let bad = ConeExpr::FullExtension { child: Box::new(ConeExpr::FullPsd { n: 3 }), n: 2 };
        assert!(build(&bad).is_err());
        let bad = ConeExpr::Intertwining {
            first: Box::new(ConeExpr::FullPsd { n: 2 }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::new(DMatrix::zeros(3, 1), DMatrix::zeros(2, 1)),
        };
        assert!(build(&bad).is_err());
    }

    #[test]
    fn expr_json_round_trip() {
        let e = ConeExpr::Intertwining {
            first: Box::new(ConeExpr::Chordal { graph: ChordalGraph::path(3) }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::coordinate(3, 0, 2, 1),
        };
        let text = serde_json::to_string(&e).unwrap();
        let back: ConeExpr = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
        let nonchordal = r#"{"kind":"chordal","graph":{"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]]}}"#;
        assert!(serde_json::from_str::<ConeExpr>(nonchordal).is_err());
    }
}
