use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rog::constructions::toeplitz_atom;
use rog::decompose::decompose_block_toeplitz;
use rog::symlin::HermMatrix;

fn main() -> Result<(), rog::error::Error> {
    let (n, m) = (3, 2);
    let mut t = DMatrix::<Complex64>::zeros(n * m, n * m);
    for (angle, u) in [(0.4, [1.0, 0.5]), (2.1, [0.0, 1.0]), (-1.2, [1.0, -1.0])] {
        let v = DVector::from_iterator(m, u.iter().map(|&x| Complex64::new(x, 0.0)));
        let h = toeplitz_atom(&v, Complex64::from_polar(1.0, angle), n);
        t += &h * h.adjoint();
    }
    let d = decompose_block_toeplitz(&HermMatrix::hermitize(t), n, m)?;
    println!("{} atoms, residual {:.2e}", d.atoms.len(), d.residual);
    for a in &d.atoms {
        println!("  weight {:.4}, block ratio angle {:.4}, |q| = {:.12}", a.weight, a.q().arg(), a.q().norm());
    }
    Ok(())
}
