use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rog::pencil_struct::{codim2_structure, pencil_decompose, Pencil};
use rog::symlin::SymMatrix;

fn main() -> Result<(), rog::error::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q1 = SymMatrix::from_diagonal(&[2.0, 1.0, 0.0, 1.0]);
    let q2 = SymMatrix::from_diagonal(&[0.0, 1.0, 3.0, -1.0]);
    let p = Pencil::new(q1.clone(), q2.clone())?;
    let d = pencil_decompose(&p, &mut rng)?;
    for b in &d.blocks {
        println!("block of size {} at angle {:.4}", b.basis.0.ncols(), b.phi);
    }
    println!("reconstruction error {:.2e}", d.reconstruction_error(&p));
    println!("{}", serde_json::to_string(&codim2_structure(&q1, &q2, &mut rng)?)?);

    // X12 = X13 = 0: both forms share the factor e1
    let a = SymMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]])?;
    let b = SymMatrix::from_rows(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]])?;
    println!("{}", serde_json::to_string(&codim2_structure(&a, &b, &mut rng)?)?);
    Ok(())
}
