use rog::cone_model::{degree, isolated_rays, simplicity_partition};
use rog::constructions::{build, ChordalGraph, ConeExpr};

fn main() -> Result<(), rog::error::Error> {
    let graphs: [(usize, &[(usize, usize)]); 3] = [
        (5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]),
        (5, &[(0, 1), (2, 3)]),
        (4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
    ];
    for (n, edges) in graphs {
        let g = ChordalGraph::new(n, edges)?;
        let k = build(&ConeExpr::Chordal { graph: g.clone() })?;
        println!(
            "n={n} cliques {:?}: dim {}, degree {}, parts {}, isolated rays {}",
            g.maximal_cliques(),
            k.dimension(),
            degree(&k)?,
            simplicity_partition(&k)?.len(),
            isolated_rays(&k)?.len()
        );
    }
    match ChordalGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]) {
        Err(e) => println!("four-cycle rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
