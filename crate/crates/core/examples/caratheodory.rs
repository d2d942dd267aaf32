use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rog::constructions::{build, random_member, ConeExpr};
use rog::decompose::carath_decompose;

fn main() -> Result<(), rog::error::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = build(&ConeExpr::Hankel { n: 4, m: 1 })?;
    let x = random_member(&k, 3, &mut rng)?;
    let d = carath_decompose(&k, &x)?;
    println!("rank-3 Hankel element splits into {} atoms, residual {:.2e}", d.len(), d.residual);
    for a in &d.atoms {
        // every atom is a moment vector (1, t, t², t³) up to scale
        let t = a.vector[1] / a.vector[0];
        println!("  weight {:>8.4}  node t = {:>8.4}", a.weight, t);
    }
    Ok(())
}
