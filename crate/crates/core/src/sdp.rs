//! Small dense log-barrier solver for linear matrix inequalities.
//!
//! minimize cᵀy  subject to  F0_b + Σ y_k F_{b,k} ≻ 0 for every block b,  A y = b.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub(crate) struct Block {
    pub f0: DMatrix<f64>,
    pub fs: Vec<DMatrix<f64>>,
}

impl Block {
    pub fn eval(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut x = self.f0.clone();
        for (k, f) in self.fs.iter().enumerate() {
            if y[k] != 0.0 {
                x += f * y[k];
            }
        }
        x
    }
}

pub(crate) struct Problem {
    pub blocks: Vec<Block>,
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Options {
    pub gap: f64,
    pub t0: f64,
    pub growth: f64,
    pub max_newton: usize,
    /// Stop once the objective drops below this value (unboundedness guard).
    pub floor: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { gap: 1e-10, t0: 1.0, growth: 5.0, max_newton: 200, floor: f64::NEG_INFINITY }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub y: DVector<f64>,
    pub value: f64,
    /// Barrier duality-gap bound `m/t` at exit.
    pub gap: f64,
    pub hit_floor: bool,
}

fn barrier(p: &Problem, y: &DVector<f64>) -> Option<f64> {
    let mut v = 0.0;
    for blk in &p.blocks {
        let chol = blk.eval(y).cholesky()?;
        v -= 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    }
    Some(v)
}

fn grad_hess(p: &Problem, y: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let d = y.len();
    let mut g = DVector::zeros(d);
    let mut h = DMatrix::zeros(d, d);
    for blk in &p.blocks {
        let inv = blk.eval(y).cholesky()?.inverse();
        let prod: Vec<DMatrix<f64>> = blk.fs.iter().map(|f| &inv * f).collect();
        for k in 0..d {
            g[k] -= prod[k].trace();
            for l in k..d {
                let v = prod[k].component_mul(&prod[l].transpose()).sum();
                h[(k, l)] += v;
                if l != k {
                    h[(l, k)] += v;
                }
            }
        }
    }
    Some((g, h))
}

/// Newton direction within `null(A)`, spanned by the columns of `basis`. The reduced Hessian is
/// Jacobi-scaled first: near the boundary its diagonal spans many orders of magnitude.
fn newton_dir(h: &DMatrix<f64>, g: &DVector<f64>, basis: &DMatrix<f64>) -> Option<DVector<f64>> {
    let hr = basis.transpose() * h * basis;
    let gr = basis.transpose() * g;
    let k = hr.nrows();
    if k == 0 {
        return Some(DVector::zeros(g.len()));
    }
    let d = DVector::from_iterator(k, (0..k).map(|i| {
        let v = hr[(i, i)];
        if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }
    }));
    let hs = DMatrix::from_fn(k, k, |i, j| hr[(i, j)] * d[i] * d[j]);
    let rhs = -gr.component_mul(&d);
    let z = match hs.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => crate::symlin::svd(&hs).solve(&rhs, 1e-14).ok()?,
    };
    Some(basis * z.component_mul(&d))
}

/// Orthonormal basis of `null(A)`.
fn null_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(d, d);
    }
    let mut padded = DMatrix::zeros(d.max(a.nrows()), d);
    padded.view_mut((0, 0), (a.nrows(), d)).copy_from(a);
    let svd = crate::symlin::svd(&padded);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.amax();
    let idx: Vec<usize> = (0..d).filter(|&i| svd.singular_values[i] <= 1e-12 * smax).collect();
    vt.select_rows(idx.iter()).transpose()
}

/// Runs the barrier method from a strictly feasible `y0` with `A y0 = b`.
pub(crate) fn solve(p: &Problem, y0: DVector<f64>, opts: Options) -> Result<Solution> {
    let m: usize = p.blocks.iter().map(|b| b.f0.nrows()).sum();
    if barrier(p, &y0).is_none() {
        return Err(Error::numerical("barrier start is not strictly feasible"));
    }
    // the part of c along the rows of A is constant on the feasible set; dropping it keeps
    // t·c from swamping the equality rows in the KKT solve
    let aat = if p.a.nrows() == 0 {
        DMatrix::zeros(0, 0)
    } else {
        (&p.a * p.a.transpose()).pseudo_inverse(1e-14).map_err(Error::numerical)?
    };
    let restore = |y: &DVector<f64>| y + p.a.transpose() * (&aat * (&p.b - &p.a * y));
    let c = &p.c - p.a.transpose() * (&aat * (&p.a * &p.c));
    let basis = null_basis(&p.a);
    let mut y = y0;
    let mut t = opts.t0;
    loop {
        for _ in 0..opts.max_newton {
            let (gb, h) = grad_hess(p, &y).ok_or_else(|| Error::numerical("lost strict feasibility"))?;
            let g = &c * t + gb;
            let Some(dy) = newton_dir(&h, &g, &basis) else {
                return Err(Error::numerical("singular Newton system"));
            };
            let dec = -g.dot(&dy);
            if dec / 2.0 < 1e-14 {
                break;
            }
            // inside the quadratic region the full step is safe; merit comparisons at large t
            // would drown in rounding
            if dec < 0.0625 {
                let mut trial = &y + &dy;
                if p.a.nrows() > 0 {
                    trial = restore(&trial);
                }
                if barrier(p, &trial).is_some() {
                    y = trial;
                    continue;
                }
            }
            let f0 = t * c.dot(&y) + barrier(p, &y).unwrap();
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-16 {
                let mut trial = &y + &dy * s;
                if p.a.nrows() > 0 {
                    let fixed = restore(&trial);
                    if barrier(p, &fixed).is_some() {
                        trial = fixed;
                    }
                }
                if let Some(bv) = barrier(p, &trial) {
                    if t * c.dot(&trial) + bv <= f0 - 0.25 * s * dec {
                        y = trial;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved {
                break;
            }
            if p.c.dot(&y) < opts.floor {
                return Ok(Solution { value: p.c.dot(&y), y, gap: m as f64 / t, hit_floor: true });
            }
        }
        if m as f64 / t < opts.gap {
            break;
        }
        t *= opts.growth;
    }
    Ok(Solution { value: p.c.dot(&y), y, gap: m as f64 / t, hit_floor: false })
}

/// Maximizes `s` with `Σ c_k B_k − sI ⪰ 0`, `tr Σ c_k B_k = 1`. Returns `(coefficients, s*)`,
/// or `None` when the span has no element of positive trace direction.
pub(crate) fn max_min_eigenvalue(basis: &[DMatrix<f64>]) -> Result<Option<(DVector<f64>, f64)>> {
    let d = basis.len();
    if d == 0 {
        return Ok(None);
    }
    let r = basis[0].nrows();
    let tau = DVector::from_iterator(d, basis.iter().map(|b| b.trace()));
    if tau.norm() < 1e-12 {
        return Ok(None);
    }
    let c0 = &tau / tau.norm_squared();
    let x0 = basis.iter().zip(c0.iter()).fold(DMatrix::zeros(r, r), |acc, (b, c)| acc + b * *c);
    let lmin = nalgebra::SymmetricEigen::new(x0).eigenvalues.min();
    // variables (c_1..c_d, s)
    let mut fs: Vec<DMatrix<f64>> = basis.to_vec();
    fs.push(-DMatrix::identity(r, r));
    let mut cost = DVector::zeros(d + 1);
    cost[d] = -1.0;
    let mut a = DMatrix::zeros(1, d + 1);
    a.view_mut((0, 0), (1, d)).copy_from(&tau.transpose());
    let prob = Problem { blocks: vec![Block { f0: DMatrix::zeros(r, r), fs }], c: cost, a, b: DVector::from_element(1, 1.0) };
    let mut y0 = DVector::zeros(d + 1);
    y0.rows_mut(0, d).copy_from(&c0);
    y0[d] = lmin - 1.0;
    let sol = solve(&prob, y0, Options { gap: 1e-11, ..Options::default() })?;
    Ok(Some((sol.y.rows(0, d).into_owned(), sol.y[d])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_span_centre() {
        let e = |i: usize| {
            let mut m = DMatrix::zeros(3, 3);
            m[(i, i)] = 1.0;
            m
        };
        let (c, s) = max_min_eigenvalue(&[e(0), e(1), e(2)]).unwrap().unwrap();
        assert!((s - 1.0 / 3.0).abs() < 1e-8);
        assert!(c.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-7));
    }

    #[test]
    fn traceless_span_has_no_interior() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(max_min_eigenvalue(&[m]).unwrap().is_none());
    }
}
