use rog::constructions::{build, ConeExpr, GlueSpec};
use rog::pencil_struct::classify_small;

fn main() -> Result<(), rog::error::Error> {
    let exprs = [
        ConeExpr::Hankel { n: 3, m: 1 },
        ConeExpr::Tridiag { n: 4 },
        ConeExpr::Hankel { n: 4, m: 1 },
        ConeExpr::Hankel { n: 2, m: 2 },
        ConeExpr::FullExtension { child: Box::new(ConeExpr::Diagonal { n: 3 }), n: 4 },
        ConeExpr::Intertwining {
            first: Box::new(ConeExpr::Hankel { n: 3, m: 1 }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::coordinate(3, 2, 2, 0),
        },
        ConeExpr::Diagonal { n: 2 },
    ];
    for e in &exprs {
        let label = classify_small(&build(e)?)?;
        println!("{:<16} {}", e.kind_name(), serde_json::to_string(&label)?);
    }
    Ok(())
}
