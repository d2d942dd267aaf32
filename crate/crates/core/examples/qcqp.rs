use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rog::constructions::{build, ConeExpr};
use rog::qcqp_relax::{certify_exactness, solve_relaxation, CertifyOptions, QcqpProblem};
use rog::symlin::SymMatrix;

fn main() -> Result<(), rog::error::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // minimize xᵀSx over the moment curve, normalized by ‖x‖ = 1
    let k = build(&ConeExpr::Hankel { n: 3, m: 1 })?;
    let s = SymMatrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![-2.0, 0.0, 1.0], vec![0.5, 1.0, 2.0]])?;
    let p = QcqpProblem::over_cone(&k, s, SymMatrix::identity(3))?;
    let sol = solve_relaxation(&p)?;
    println!("relaxation: {:?}, value {:?}, kkt {:.1e}", sol.status, sol.objective, sol.kkt_residual);
    let cert = certify_exactness(&p, CertifyOptions::default(), &mut rng)?;
    println!("{}", serde_json::to_string_pretty(&cert)?);

    // two off-diagonal constraints whose zero pattern is a four-cycle
    let pair = |i: usize, j: usize| {
        let mut m = nalgebra::DMatrix::zeros(4, 4);
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
        SymMatrix::symmetrize(m)
    };
    let s = SymMatrix::from_rows(&[
        vec![0.0, 1.0, 0.0, 1.0],
        vec![1.0, 0.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0, -1.0],
        vec![1.0, 0.0, -1.0, 0.0],
    ])?;
    let p = QcqpProblem::new(s, SymMatrix::identity(4), vec![pair(0, 2), pair(1, 3)])?;
    let cert = certify_exactness(&p, CertifyOptions { samples: 5000 }, &mut rng)?;
    println!("four-cycle pattern: {:?}, relaxed {:.4}", cert.status, cert.relaxed_value);
    Ok(())
}
