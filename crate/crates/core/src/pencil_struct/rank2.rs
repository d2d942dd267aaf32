use crate::error::{Error, Result};
use crate::symlin::{self, SymMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

fn form(q: &SymMatrix, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    x.dot(&(q.matrix() * y))
}

/// The `d×3` matrix with rows `(xᵀQx, 2xᵀQy, yᵀQy)`.
pub fn rank2_matrix(qs: &[SymMatrix], x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(qs.len(), 3, |i, j| match j {
        0 => form(&qs[i], x, x),
        1 => 2.0 * form(&qs[i], x, y),
        _ => form(&qs[i], y, y),
    })
}

/// PSD rank-2 element `a xxᵀ + b(xyᵀ + yxᵀ) + c yyᵀ` generating the face of `span{x, y}`
/// in `{X ⪰ 0 : ⟨X, Q_i⟩ = 0}`, when that face is generated by a rank-2 extreme element.
pub fn rank2_extreme_check(qs: &[SymMatrix], x: &DVector<f64>, y: &DVector<f64>) -> Option<SymMatrix> {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 || (x.dot(y).abs() - nx * ny).abs() <= 1e-10 * nx * ny {
        return None;
    }
    let (x, y) = (x / nx, y / ny);
    let m = rank2_matrix(qs, &x, &y);
    let k = if m.nrows() < 3 {
        let mut p = DMatrix::zeros(3, 3);
        p.rows_mut(0, m.nrows()).copy_from(&m);
        p
    } else {
        m
    };
    let svd = symlin::svd(&k);
    let s = &svd.singular_values;
    let smax = s.max();
    if smax == 0.0 {
        return None;
    }
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let tol = 1e-9 * smax;
    let rank = order.iter().filter(|&&i| s[i] > tol).count();
    if rank != 2 {
        return None;
    }
    let ker = vt.row(order[2]).transpose();
    let (mut a, mut b, mut c) = (ker[0], ker[1], ker[2]);
    if b * b - a * c >= -1e-12 {
        return None;
    }
    if a < 0.0 {
        (a, b, c) = (-a, -b, -c);
    }
    let xm = &x * x.transpose() * a + (&x * y.transpose() + &y * x.transpose()) * b + &y * y.transpose() * c;
    Some(SymMatrix::symmetrize(xm))
}

/// `(yᵀQ1y·xᵀQ2x − xᵀQ1x·yᵀQ2y)² − 4(xᵀQ1y·yᵀQ2y − xᵀQ2y·yᵀQ1y)(xᵀQ1x·xᵀQ2y − xᵀQ1y·xᵀQ2x)`.
/// Negative exactly when `span{x, y}` carries a rank-2 extreme element of the codimension-2 cone.
pub fn biquartic_p(q1: &SymMatrix, q2: &SymMatrix, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let (a1, b1, c1) = (form(q1, x, x), form(q1, x, y), form(q1, y, y));
    let (a2, b2, c2) = (form(q2, x, x), form(q2, x, y), form(q2, y, y));
    (c1 * a2 - a1 * c2).powi(2) - 4.0 * (b1 * c2 - b2 * c1) * (a1 * b2 - b1 * a2)
}

/// Outcome of the codimension-2 structure analysis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Codim2Structure {
    /// Every sampled common null vector `z` had `Q1z ∥ Q2z`.
    DependentAtNullVectors { samples: usize },
    /// `Q1 = u⊗q1 + q1⊗u`, `Q2 = u⊗q2 + q2⊗u`.
    SharedFactor {
        #[serde(with = "crate::serde_util::dvec")]
        u: DVector<f64>,
        #[serde(with = "crate::serde_util::dvec")]
        q1: DVector<f64>,
        #[serde(with = "crate::serde_util::dvec")]
        q2: DVector<f64>,
    },
    /// `span{x, y}` carries a rank-2 extreme element.
    HasRank2Extremes {
        #[serde(with = "crate::serde_util::dvec")]
        x: DVector<f64>,
        #[serde(with = "crate::serde_util::dvec")]
        y: DVector<f64>,
    },
}

fn gaussian(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Whether some `cos θ·Q1 + sin θ·Q2` is positive definite, searched on a grid of angles.
fn definite_combination(q1: &SymMatrix, q2: &SymMatrix) -> Result<bool> {
    let tol = 1e-9 * q1.norm().max(q2.norm());
    for i in 0..720 {
        let th = std::f64::consts::PI * i as f64 / 360.0;
        let m = SymMatrix::symmetrize(q1.matrix() * th.cos() + q2.matrix() * th.sin());
        if symlin::eig_sym(&m)?.values.min() > tol {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Gauss-Newton on `zᵀQ1z = zᵀQ2z = 0` over the unit sphere.
fn common_null_vector(q1: &SymMatrix, q2: &SymMatrix, z0: DVector<f64>) -> Option<DVector<f64>> {
    let scale = q1.norm().max(q2.norm());
    let mut z = z0.normalize();
    for _ in 0..60 {
        let (g1, g2) = (q1.matrix() * &z, q2.matrix() * &z);
        let f = nalgebra::Vector2::new(z.dot(&g1), z.dot(&g2));
        if f.norm() <= 1e-13 * scale {
            return Some(z);
        }
        let j = DMatrix::from_rows(&[(g1 * 2.0).transpose(), (g2 * 2.0).transpose()]);
        let jjt = &j * j.transpose();
        let step = j.transpose() * jjt.try_inverse()? * DVector::from_column_slice(f.as_slice());
        z -= step;
        let nz = z.norm();
        if !nz.is_finite() || nz < 1e-12 {
            return None;
        }
        z /= nz;
    }
    None
}

/// Least-squares `u` with `Q_i = q_i⊗u + u⊗q_i`, and the relative residual.
fn shared_factor(q1: &SymMatrix, q2: &SymMatrix, a: &DVector<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.len();
    let mut m = DMatrix::zeros(2 * n * n, n);
    let mut rhs = DVector::zeros(2 * n * n);
    for (blk, (q, v)) in [(q1, a), (q2, b)].into_iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let r = blk * n * n + i * n + j;
                // (v uᵀ + u vᵀ)_ij = v_i u_j + u_i v_j
                m[(r, j)] += v[i];
                m[(r, i)] += v[j];
                rhs[r] = q.get(i, j);
            }
        }
    }
    let u = crate::symlin::lstsq(&m, &DMatrix::from_column_slice(2 * n * n, 1, rhs.as_slice()), 1e-12).column(0).into_owned();
    let res = (&m * &u - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    (u, res)
}

fn hunt_near(
    q1: &SymMatrix,
    q2: &SymMatrix,
    z: &DVector<f64>,
    rng: &mut impl Rng,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let qs = [q1.clone(), q2.clone()];
    for _ in 0..2000 {
        let y = gaussian(z.len(), rng);
        let d = gaussian(z.len(), rng);
        for t in [1e-1, 1e-2, 1e-3] {
            for sgn in [1.0, -1.0] {
                let x = z + &d * (t * sgn);
                if biquartic_p(q1, q2, &x, &y) < 0.0 && rank2_extreme_check(&qs, &x, &y).is_some() {
                    return Some((x, y));
                }
            }
        }
    }
    None
}

/// Sampled analysis of `{X ⪰ 0 : ⟨X, Q1⟩ = ⟨X, Q2⟩ = 0}`: a rank-2 extreme witness,
/// the shared-factor form, or the evidence that common null vectors give dependent forms.
pub fn codim2_structure(q1: &SymMatrix, q2: &SymMatrix, rng: &mut impl Rng) -> Result<Codim2Structure> {
    let p = super::Pencil::new(q1.clone(), q2.clone())?;
    if !p.independent() {
        return Err(Error::invalid("forms are linearly dependent"));
    }
    let n = q1.n();
    let qs = [q1.clone(), q2.clone()];
    for _ in 0..10_000 {
        let x = gaussian(n, rng);
        let y = gaussian(n, rng);
        if biquartic_p(q1, q2, &x, &y) < 0.0 && rank2_extreme_check(&qs, &x, &y).is_some() {
            return Ok(Codim2Structure::HasRank2Extremes { x, y });
        }
    }
    if definite_combination(q1, q2)? {
        // no common real zero at all, so the condition holds vacuously
        return Ok(Codim2Structure::DependentAtNullVectors { samples: 0 });
    }
    let mut converged = 0;
    let mut failures = 0;
    for _ in 0..1000 {
        let Some(z) = common_null_vector(q1, q2, gaussian(n, rng)) else {
            failures += 1;
            continue;
        };
        converged += 1;
        let (a, b) = (q1.matrix() * &z, q2.matrix() * &z);
        let sv = symlin::svd(&DMatrix::from_columns(&[a.clone(), b.clone()])).singular_values;
        if sv.min() <= 1e-6 * sv.max() {
            continue;
        }
        let (u, res) = shared_factor(q1, q2, &a, &b);
        let span = symlin::svd(&DMatrix::from_columns(&[u.clone(), a.clone(), b.clone()])).singular_values;
        if res <= 1e-7 && span.min() > 1e-8 * span.max() {
            return Ok(Codim2Structure::SharedFactor { u, q1: a, q2: b });
        }
        if let Some((x, y)) = hunt_near(q1, q2, &z, rng) {
            return Ok(Codim2Structure::HasRank2Extremes { x, y });
        }
        return Err(Error::numerical("independent forms at a null vector, but no witness or shared factor found"));
    }
    if converged == 0 && failures > 0 {
        return Err(Error::numerical("Newton refinement never reached a common null vector"));
    }
    Ok(Codim2Structure::DependentAtNullVectors { samples: converged })
}
