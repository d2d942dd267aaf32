use super::oracle::leaf_ray;
use super::peel::Peeler;
use super::{Decomposition, RankOneAtom};
use crate::constructions::{hankel_cone, moment_vector_homogeneous, ConeExpr};
use crate::error::{Error, Result};
use crate::symlin::{self, lstsq, svec, SymMatrix};
use nalgebra::DMatrix;

const CLUSTER_GAP: f64 = 1e-6;
const ROTATIONS: [f64; 6] = [0.0, 0.61, -0.43, 1.27, -1.09, 0.23];

/// Rank-one terms `(v(θ) ⊗ x)(v(θ) ⊗ x)ᵀ` of a PSD block-Hankel matrix, nodes by a shift eigenproblem.
pub fn decompose_hankel(x: &SymMatrix, n: usize, m: usize) -> Result<Decomposition> {
    if x.n() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: x.n() });
    }
    let cone = hankel_cone(n, m)?;
    let scale = 1.0 + x.norm();
    if cone.dist_to_span(x) > 1e-8 * scale {
        return Err(Error::invalid("matrix is not block-Hankel"));
    }
    if !symlin::psd_check(x, 1e-8) {
        return Err(Error::invalid("matrix is not positive semidefinite"));
    }
    let expr = ConeExpr::Hankel { n, m };
    let mut oracle = |_: &SymMatrix, w: &DMatrix<f64>| leaf_ray(&expr, w);
    let mut peeler = Peeler::new(x);
    if n == 1 {
        peeler.drain_eigen();
        return Ok(Decomposition::from_atoms(x, peeler.atoms));
    }
    peeler.run((n - 1) * m, &mut oracle)?;
    let prony = if peeler.rank() > 0 { prony_atoms(&peeler, n, m) } else { Some(Vec::new()) };
    let atoms = match prony {
        Some(mut tail) => {
            let mut atoms = std::mem::take(&mut peeler.atoms);
            atoms.append(&mut tail);
            atoms
        }
        None => {
            peeler.run(0, &mut oracle)?;
            peeler.atoms
        }
    };
    Ok(Decomposition::from_atoms(x, atoms))
}

/// Solves the remaining part exactly when the shift eigenproblem is well posed; `None` asks for the fallback.
fn prony_atoms(peeler: &Peeler, n: usize, m: usize) -> Option<Vec<RankOneAtom>> {
    let g = peeler.factor();
    let rows = (n - 1) * m;
    let big = g.rows(0, rows).into_owned();
    let small = g.rows(m, rows).into_owned();
    let (rho, ga, gb) = ROTATIONS
        .iter()
        .map(|&rho| {
            let (s, c) = f64::sin_cos(rho);
            let ga = &big * c + &small * s;
            let gb = &small * c - &big * s;
            (rho, ga, gb)
        })
        .max_by(|a, b| conditioning(&a.1).total_cmp(&conditioning(&b.1)))?;
    if conditioning(&ga) < 1e-8 {
        return None;
    }
    let shift = lstsq(&ga, &gb, 1e-13);
    let eigs = shift.complex_eigenvalues();
    let mut ts: Vec<f64> = Vec::new();
    for z in eigs.iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            return None;
        }
        ts.push(z.re);
    }
    ts.sort_by(f64::total_cmp);
    let mut nodes: Vec<f64> = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    for t in ts {
        if let Some(&last) = cluster.last() {
            if (t - last).abs() > CLUSTER_GAP * (1.0 + t.abs().max(last.abs())) {
                nodes.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
                cluster.clear();
            }
        }
        cluster.push(t);
    }
    if !cluster.is_empty() {
        nodes.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    }
    let thetas: Vec<f64> = nodes.iter().map(|t| rho + t.atan()).collect();
    let target = peeler.current();
    weights_at_nodes(&target, &thetas, n, m, peeler.rank())
}

fn conditioning(a: &DMatrix<f64>) -> f64 {
    let s = a.singular_values();
    let max = s.max();
    if max == 0.0 || a.ncols() == 0 {
        0.0
    } else {
        s.min() / max
    }
}

/// Fits PSD blocks `M_k` with `X = Σ (v_k ⊗ I) M_k (v_k ⊗ I)ᵀ` and splits each into atoms.
fn weights_at_nodes(x: &SymMatrix, thetas: &[f64], n: usize, m: usize, rank: usize) -> Option<Vec<RankOneAtom>> {
    let eye = DMatrix::<f64>::identity(m, m);
    let blocks: Vec<DMatrix<f64>> = thetas.iter().map(|&t| moment_vector_homogeneous(n, t).kronecker(&eye)).collect();
    let mut cols = Vec::new();
    for b in &blocks {
        for i in 0..m {
            for j in i..m {
                let mut e = DMatrix::zeros(m, m);
                e[(i, j)] = 1.0;
                e[(j, i)] = 1.0;
                cols.push(svec(&SymMatrix::symmetrize(b * e * b.transpose())));
            }
        }
    }
    let a = DMatrix::from_columns(&cols);
    let rhs = svec(x);
    let coef = lstsq(&a, &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()), 1e-13);
    let fit = &a * &coef;
    let scale = 1.0 + x.norm();
    if (fit.column(0) - &rhs).norm() > 1e-9 * scale {
        return None;
    }
    let per = m * (m + 1) / 2;
    let mut atoms = Vec::new();
    for (k, b) in blocks.iter().enumerate() {
        let mut mk = DMatrix::zeros(m, m);
        let mut idx = k * per;
        for i in 0..m {
            for j in i..m {
                mk[(i, j)] = coef[idx];
                mk[(j, i)] = coef[idx];
                idx += 1;
            }
        }
        let e = symlin::eig(&SymMatrix::symmetrize(mk));
        for (j, &lam) in e.values.iter().enumerate() {
            if lam < -1e-8 * scale {
                return None;
            }
            if lam > 1e-9 * scale {
                atoms.push(RankOneAtom::new(lam, b * e.vectors.column(j)));
            }
        }
    }
    (atoms.len() == rank).then_some(atoms)
}
