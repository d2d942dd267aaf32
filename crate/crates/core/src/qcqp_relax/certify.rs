use super::{certified_rog, induced_cone, solve_relaxation, QcqpProblem, SdpStatus};
use crate::cone_model::SpectrahedralCone;
use crate::error::{Error, Result};
use crate::serde_util;
use crate::symlin::{eig_sym, lstsq, null_space_scaled, smat, svec, svec_len, SymMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const RANK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactnessStatus {
    ExactWithSolution,
    ExactByRog,
    GapDetected,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactnessCertificate {
    pub status: ExactnessStatus,
    #[serde(with = "serde_util::opt_dvec", default)]
    pub x_opt: Option<DVector<f64>>,
    pub relaxed_value: f64,
    pub extracted_value: Option<f64>,
    pub purified_rank: usize,
    /// Rank-one feasible points found while looking for a gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub samples: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { samples: 100_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Purified {
    pub x: SymMatrix,
    pub rank: usize,
    pub steps: usize,
}

fn image(x: &SymMatrix) -> Result<DMatrix<f64>> {
    Ok(eig_sym(x)?.image_rel(RANK_TOL))
}

/// Walks from `x` to an extreme point of `{X ∈ K : ⟨B,X⟩ = 1}` inside the face of `x`,
/// never increasing `⟨S,X⟩`. Each step moves to the PSD boundary and drops the rank.
pub fn purify(p: &QcqpProblem, k: &SpectrahedralCone, x: &SymMatrix) -> Result<Purified> {
    let n = p.n();
    let mut x = x.clone();
    let mut steps = 0;
    loop {
        let v = image(&x)?;
        let r = v.ncols();
        if r <= 1 || steps > n {
            return finish(p, x, r, steps);
        }
        let q = svec_len(r);
        let lifted: Vec<SymMatrix> = (0..q)
            .map(|j| {
                let mut e = DVector::zeros(q);
                e[j] = 1.0;
                SymMatrix::symmetrize(&v * smat(&e, r).matrix() * v.transpose())
            })
            .collect();
        let p_len = svec_len(n);
        let mut c = DMatrix::zeros(p_len + 1, q);
        for (j, d) in lifted.iter().enumerate() {
            c.view_mut((0, j), (p_len, 1)).copy_from(&svec(&d.sub(&k.project(d))));
            c[(p_len, j)] = d.dot(p.normalization()) / p.normalization().norm().max(1.0);
        }
        let dirs = null_space_scaled(&c, 1e-8, 1.0);
        if dirs.ncols() == 0 {
            return finish(p, x, r, steps);
        }
        let z = smat(&dirs.column(0).into_owned(), r);
        let delta = SymMatrix::symmetrize(&v * z.matrix() * v.transpose());
        let xv = v.transpose() * x.matrix() * &v;
        let Some(chol) = xv.clone().cholesky() else {
            return Err(Error::numerical("purification lost definiteness on the image"));
        };
        let linv = chol.l().try_inverse().ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
        let m = eig_sym(&SymMatrix::symmetrize(&linv * z.matrix() * linv.transpose()))?;
        let (mu_max, mu_min) = (m.values.max(), m.values.min());
        let up = if mu_min < 0.0 { Some(-1.0 / mu_min) } else { None };
        let down = if mu_max > 0.0 { Some(1.0 / mu_max) } else { None };
        let slope = delta.dot(p.cost());
        let tol = 1e-12 * p.cost().norm().max(1.0);
        let step = match (slope < -tol, slope > tol) {
            (true, _) => up.or(down.map(|t| -t)),
            (_, true) => down.map(|t| -t).or(up),
            _ => match (up, down) {
                (Some(a), Some(b)) if b < a => Some(-b),
                (Some(a), _) => Some(a),
                (None, b) => b.map(|t| -t),
            },
        };
        let Some(t) = step else {
            return finish(p, x, r, steps);
        };
        x = SymMatrix::symmetrize(&v * (xv + z.matrix() * t) * v.transpose());
        steps += 1;
    }
}

/// Gauss–Newton on the unit sphere towards `{xᵀA_i x = 0}`.
fn project_rank_one(p: &QcqpProblem, mut x: DVector<f64>) -> Option<DVector<f64>> {
    let n = p.n();
    let forms: Vec<&DMatrix<f64>> = p.constraints().iter().map(|a| a.matrix()).collect();
    x = x.normalize();
    for _ in 0..40 {
        let f = DVector::from_iterator(forms.len(), forms.iter().map(|a| (x.transpose() * *a * &x)[(0, 0)]));
        if f.amax() <= 1e-12 {
            return Some(x);
        }
        let mut j = DMatrix::zeros(forms.len(), n);
        for (i, a) in forms.iter().enumerate() {
            j.set_row(i, &(*a * &x * 2.0).transpose());
        }
        let dx = lstsq(&j, &DMatrix::from_column_slice(f.len(), 1, f.as_slice()), 1e-12);
        x -= dx.column(0);
        let nx = x.norm();
        if !(nx > 1e-12) {
            return None;
        }
        x /= nx;
    }
    None
}

/// An interior-point optimizer that is rank one up to a small tail stalls the walk above;
/// round it to the nearby feasible rank-one point when that does not raise the objective.
fn finish(p: &QcqpProblem, x: SymMatrix, rank: usize, steps: usize) -> Result<Purified> {
    if rank <= 1 {
        return Ok(Purified { x, rank, steps });
    }
    let e = eig_sym(&x)?;
    let (top, second) = (e.values[0], e.values[1]);
    if top <= 0.0 || second > 1e-3 * top {
        return Ok(Purified { x, rank, steps });
    }
    let v0 = e.vectors.column(0).into_owned();
    let Some(mut v) = project_rank_one(p, v0.clone()) else {
        return Ok(Purified { x, rank, steps });
    };
    if v.dot(&v0) < 0.0 {
        v = -v;
    }
    let bv = (v.transpose() * p.normalization().matrix() * &v)[(0, 0)];
    if (&v - &v0).norm() > 1e-3 || bv <= 0.0 {
        return Ok(Purified { x, rank, steps });
    }
    let rounded = SymMatrix::outer(&(v / bv.sqrt()));
    let before = p.cost().dot(&x);
    if p.cost().dot(&rounded) > before + 1e-6 * (1.0 + before.abs()) {
        return Ok(Purified { x, rank, steps });
    }
    Ok(Purified { x: rounded, rank: 1, steps: steps + 1 })
}

/// Projects a random point onto `{xᵀA_i x = 0}`.
fn rank_one_sample<R: Rng>(p: &QcqpProblem, rng: &mut R) -> Option<DVector<f64>> {
    project_rank_one(p, DVector::from_fn(p.n(), |_, _| rng.sample::<f64, _>(StandardNormal)))
}

/// Rank-one feasible points and the smallest `xᵀSx / xᵀBx` among them.
fn sample_rank_one<R: Rng>(p: &QcqpProblem, count: usize, rng: &mut R) -> (usize, f64) {
    let mut found = 0;
    let mut best = f64::INFINITY;
    for _ in 0..count {
        let Some(x) = rank_one_sample(p, rng) else { continue };
        let bx = (x.transpose() * p.normalization().matrix() * &x)[(0, 0)];
        if bx <= 1e-9 * p.normalization().norm() {
            continue;
        }
        found += 1;
        best = best.min(p.value_at(&x) / bx);
    }
    (found, best)
}

/// Solves the relaxation, purifies the optimizer and compares it with rank-one points.
pub fn certify_exactness<R: Rng>(p: &QcqpProblem, opts: CertifyOptions, rng: &mut R) -> Result<ExactnessCertificate> {
    let sol = solve_relaxation(p)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::NotOptimal(serde_json::to_string(&sol.status)?.trim_matches('"').to_string()));
    }
    let relaxed = sol.objective.unwrap_or(f64::NAN);
    let k = induced_cone(p)?;
    let rog = certified_rog(&k);
    let pur = purify(p, &k, &sol.x)?;

    let mut x_opt = None;
    let mut extracted = None;
    let mut exact_solution = false;
    if pur.rank == 1 {
        let e = eig_sym(&pur.x)?;
        let mut x = e.vectors.column(0) * e.values[0].max(0.0).sqrt();
        let bx = (x.transpose() * p.normalization().matrix() * &x)[(0, 0)];
        if bx > 0.0 {
            x /= bx.sqrt();
            let v = p.value_at(&x);
            exact_solution = p.infeasibility(&x) <= 1e-6 && (v - relaxed).abs() <= 1e-6 * (1.0 + relaxed.abs());
            extracted = Some(v);
            x_opt = Some(x);
        }
    }
    let mut cert = ExactnessCertificate {
        status: ExactnessStatus::Inconclusive,
        x_opt,
        relaxed_value: relaxed,
        extracted_value: extracted,
        purified_rank: pur.rank,
        samples: None,
    };
    if rog {
        cert.status = ExactnessStatus::ExactByRog;
    } else if exact_solution {
        cert.status = ExactnessStatus::ExactWithSolution;
    } else {
        let (found, best) = sample_rank_one(p, opts.samples, rng);
        cert.samples = Some(found);
        if found > 0 && best > relaxed + 1e-6 {
            cert.status = ExactnessStatus::GapDetected;
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn null_cone_constraint_is_exact() {
        let s = SymMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, -1.0]]).unwrap();
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]);
        let p = QcqpProblem::new(s.clone(), SymMatrix::identity(2), vec![a]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let c = certify_exactness(&p, CertifyOptions { samples: 100 }, &mut rng).unwrap();
        assert_eq!(c.status, ExactnessStatus::ExactWithSolution);
        let x = c.x_opt.unwrap();
        assert!((x[0].abs() - x[1].abs()).abs() < 1e-6);
        // feasible rays are (1, ±1)/√2 with values 1/2 ± 0.3
        let oracle = [1.0, -1.0]
            .iter()
            .map(|sg| p.value_at(&DVector::from_vec(vec![1.0, *sg]).normalize()))
            .fold(f64::INFINITY, f64::min);
        assert!((oracle - 0.2).abs() < 1e-12);
        assert!((c.extracted_value.unwrap() - 0.2).abs() < 1e-6);
    }

    #[test]
    fn chordal_pattern_is_exact_by_rog() {
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 2)] = 1.0;
        a[(2, 0)] = 1.0;
        let s = SymMatrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![-2.0, 0.0, 1.5], vec![0.5, 1.5, -1.0]]).unwrap();
        let p = QcqpProblem::new(s, SymMatrix::identity(3), vec![SymMatrix::symmetrize(a)]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let c = certify_exactness(&p, CertifyOptions::default(), &mut rng).unwrap();
        assert_eq!(c.status, ExactnessStatus::ExactByRog);
        assert_eq!(c.purified_rank, 1);
        let x = c.x_opt.unwrap();
        assert!(p.infeasibility(&x) < 1e-6);
        assert!((c.extracted_value.unwrap() - c.relaxed_value).abs() < 1e-6);
    }
}
