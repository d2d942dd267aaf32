use nalgebra::DMatrix;
use rog::constructions::{build, ConeExpr};
use rog::isomorph::{cones_isomorphic, IsoOutcome};

fn main() -> Result<(), rog::error::Error> {
    let k = build(&ConeExpr::Hankel { n: 4, m: 1 })?;
    let a = DMatrix::from_row_slice(4, 4, &[2.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 1.0, 0.0, 0.0, 3.0]);
    let moved = k.congruence(&a)?;
    match cones_isomorphic(&k, &moved)? {
        IsoOutcome::Isomorphic { witness } => {
            println!("witness found, per-generator error {:.2e}", witness.ray_error(k.generators(), moved.generators()))
        }
        other => println!("{other:?}"),
    }

    let han = build(&ConeExpr::Hankel { n: 3, m: 1 })?;
    let tri = build(&ConeExpr::Tridiag { n: 3 })?;
    if let IsoOutcome::NotIsomorphic { reason } = cones_isomorphic(&han, &tri)? {
        println!("Han(3) vs Tri(3): {reason}");
    }
    Ok(())
}
