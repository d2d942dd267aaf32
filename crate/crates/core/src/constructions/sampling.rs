use super::expr::ConeExpr;
use super::families::{moment_vector_homogeneous, quartic_lift, unit};
use super::{combinators::intertwine_maps, ChordalGraph};
use crate::cone_model::{degree, SpectrahedralCone};
use crate::error::{Error, Result};
use crate::symlin::{self, SymMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn clique_ray(g: &ChordalGraph, rng: &mut impl Rng) -> DVector<f64> {
    let cliques = g.maximal_cliques();
    let c = &cliques[rng.gen_range(0..cliques.len())];
    let mut x = DVector::zeros(g.n());
    for &v in c {
        x[v] = rng.sample(StandardNormal);
    }
    x
}

/// Random nonzero x with `xxᵀ` in the cone of `expr`.
pub fn sample_ray(expr: &ConeExpr, rng: &mut impl Rng) -> Result<DVector<f64>> {
    let x = match expr {
        ConeExpr::FullPsd { n } => gaussian(*n, rng),
        ConeExpr::Diagonal { n } => unit(*n, rng.gen_range(0..*n)),
        ConeExpr::Hankel { n, m } => {
            let theta = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
            moment_vector_homogeneous(*n, theta).kronecker(&gaussian(*m, rng))
        }
        ConeExpr::Tridiag { n } => clique_ray(&ChordalGraph::path(*n), rng),
        ConeExpr::Chordal { graph } => clique_ray(graph, rng),
        ConeExpr::Codim1 { q } => codim1_ray(q, rng)?,
        ConeExpr::TernaryQuartic => {
            let u = gaussian(3, rng);
            quartic_lift(&[u[0], u[1], u[2]])
        }
        ConeExpr::CrossRatio { angles } => {
            let planes = super::cross_ratio_planes(angles);
            let p = &planes[rng.gen_range(0..planes.len())];
            p * gaussian(2, rng)
        }
        ConeExpr::MomentCone { vectors } => DVector::from_column_slice(&vectors[rng.gen_range(0..vectors.len())]),
        ConeExpr::BlockToeplitz { .. } => return Err(Error::invalid("block-Toeplitz rays are complex")),
        ConeExpr::DirectSum { children } => {
            let n = expr.size();
            let pick = rng.gen_range(0..children.len());
            let offset: usize = children[..pick].iter().map(ConeExpr::size).sum();
            let y = sample_ray(&children[pick], rng)?;
            let mut x = DVector::zeros(n);
            x.rows_mut(offset, y.len()).copy_from(&y);
            x
        }
        ConeExpr::FullExtension { child, n } => {
            let c = child.size();
            let mut x = DVector::zeros(*n);
            if rng.gen_bool(0.8) {
                x.rows_mut(0, c).copy_from(&sample_ray(child, rng)?);
            }
            x.rows_mut(c, n - c).copy_from(&gaussian(n - c, rng));
            x
        }
        ConeExpr::Intertwining { first, second, glue } => {
            let maps = intertwine_maps(first.size(), second.size(), glue)?;
            if rng.gen_bool(0.5) {
                &maps.f1 * sample_ray(first, rng)?
            } else {
                &maps.f2 * sample_ray(second, rng)?
            }
        }
        ConeExpr::Congruence { child, forward, .. } => &forward.0 * sample_ray(child, rng)?,
    };
    if x.norm() == 0.0 {
        return sample_ray(expr, rng);
    }
    Ok(x)
}

fn codim1_ray(q: &SymMatrix, rng: &mut impl Rng) -> Result<DVector<f64>> {
    let n = q.n();
    for _ in 0..1000 {
        let u = gaussian(n, rng);
        let w = gaussian(n, rng);
        let qm = q.matrix();
        // (u + t w)ᵀ Q (u + t w) = a t² + 2 b t + c
        let a = w.dot(&(qm * &w));
        let b = u.dot(&(qm * &w));
        let c = u.dot(&(qm * &u));
        let disc = b * b - a * c;
        if disc < 0.0 || a.abs() < 1e-12 {
            continue;
        }
        let t = if rng.gen_bool(0.5) { (-b + disc.sqrt()) / a } else { (-b - disc.sqrt()) / a };
        return Ok(u + w * t);
    }
    Err(Error::numerical("could not sample the null cone of Q"))
}

/// Sum of `rank` sampled rank-one elements with random positive weights, resampled
/// until its numerical rank equals `rank`.
pub fn random_member(k: &SpectrahedralCone, rank: usize, rng: &mut impl Rng) -> Result<SymMatrix> {
    let expr = k.expr().ok_or_else(|| Error::OracleUnavailable("cone without construction tree".into()))?;
    if rank > degree(k)? {
        return Err(Error::invalid(format!("rank {rank} exceeds the cone degree")));
    }
    for _ in 0..200 {
        let mut x = DMatrix::zeros(k.n(), k.n());
        for _ in 0..rank {
            let v = sample_ray(expr, rng)?.normalize();
            let w: f64 = rng.gen_range(0.5..2.0);
            x += &v * v.transpose() * w;
        }
        let x = SymMatrix::symmetrize(x);
        if symlin::numeric_rank(&x, 1e-6) == rank {
            return Ok(x);
        }
    }
    Err(Error::numerical(format!("could not sample an element of rank {rank}")))
}
