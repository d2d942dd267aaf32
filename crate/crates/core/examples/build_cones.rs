use rog::cone_model::{degree, isolated_rays, simplicity_partition};
use rog::constructions::{build, ChordalGraph, ConeExpr, GlueSpec};
use rog::symlin::SymMatrix;

fn main() -> Result<(), rog::error::Error> {
    let exprs = [
        ConeExpr::Hankel { n: 4, m: 1 },
        ConeExpr::Hankel { n: 2, m: 2 },
        ConeExpr::Tridiag { n: 5 },
        ConeExpr::TernaryQuartic,
        ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, 1.0, -1.0]) },
        ConeExpr::Chordal { graph: ChordalGraph::new(4, &[(0, 1), (1, 2), (0, 2), (2, 3)])? },
        ConeExpr::FullExtension { child: Box::new(ConeExpr::Diagonal { n: 2 }), n: 4 },
        ConeExpr::Intertwining {
            first: Box::new(ConeExpr::Hankel { n: 3, m: 1 }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::coordinate(3, 2, 2, 0),
        },
        ConeExpr::DirectSum { children: vec![ConeExpr::FullPsd { n: 1 }, ConeExpr::Hankel { n: 3, m: 1 }] },
    ];
    println!("{:<16} {:>3} {:>4} {:>6} {:>6} {:>8}", "kind", "n", "dim", "degree", "parts", "isolated");
    for e in &exprs {
        let k = build(e)?;
        println!(
            "{:<16} {:>3} {:>4} {:>6} {:>6} {:>8}",
            e.kind_name(),
            k.n(),
            k.dimension(),
            degree(&k)?,
            simplicity_partition(&k)?.len(),
            isolated_rays(&k)?.len()
        );
    }
    Ok(())
}
