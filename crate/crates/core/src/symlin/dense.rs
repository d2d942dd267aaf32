use super::SymMatrix;
use nalgebra::{DMatrix, DVector, Dyn, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SQRT2: f64 = std::f64::consts::SQRT_2;

pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Isometric coordinates of a symmetric matrix: diagonal entries as is,
/// off-diagonal entries scaled by √2, upper triangle row-major.
pub fn svec(a: &SymMatrix) -> DVector<f64> {
    let n = a.n();
    let m = a.matrix();
    let mut out = DVector::zeros(svec_len(n));
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[k] = if i == j { m[(i, i)] } else { SQRT2 * m[(i, j)] };
            k += 1;
        }
    }
    out
}

pub fn smat(v: &DVector<f64>, n: usize) -> SymMatrix {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / SQRT2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    SymMatrix(m)
}

fn recompose_error(s: &SVD<f64, Dyn, Dyn>, a: &DMatrix<f64>) -> f64 {
    match (&s.u, &s.v_t) {
        (Some(u), Some(vt)) => (u * DMatrix::from_diagonal(&s.singular_values) * vt - a).norm(),
        _ => f64::INFINITY,
    }
}

/// Thin SVD with both factors. nalgebra's bidiagonalization occasionally returns factors
/// that do not reproduce sparse structured inputs; those are retried on `A·Q` for fixed
/// random orthogonal `Q`, with `Qᵀ` folded back into `Vᵀ`.
pub fn svd(a: &DMatrix<f64>) -> SVD<f64, Dyn, Dyn> {
    let tol = 1e-11 * a.norm().max(f64::MIN_POSITIVE);
    let first = a.clone().svd(true, true);
    if recompose_error(&first, a) <= tol {
        return first;
    }
    let c = a.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = (recompose_error(&first, a), first);
    for _ in 0..4 {
        let g = DMatrix::from_fn(c, c, |_, _| StandardNormal.sample(&mut rng));
        let q = g.qr().q();
        let mut s = (a * &q).svd(true, true);
        s.v_t = s.v_t.map(|vt| vt * q.transpose());
        let err = recompose_error(&s, a);
        if err <= tol {
            return s;
        }
        if err < best.0 {
            best = (err, s);
        }
    }
    best.1
}

fn svd_padded(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (r, c) = a.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = svd(&padded);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    (svd.singular_values, u, vt)
}

/// Orthonormal basis (columns) of the right null space of `a`, relative threshold.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let c = a.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(c, c);
    }
    let (s, _, vt) = svd_padded(a);
    let smax = s.amax();
    let idx: Vec<usize> = (0..c).filter(|&i| smax == 0.0 || s[i] <= rel_tol * smax).collect();
    vt.select_rows(idx.iter()).transpose()
}

/// Null space where singular values below `tol·max(σmax, scale)` count as zero; use when the
/// columns have a known magnitude and `a` may be numerically zero.
pub fn null_space_scaled(a: &DMatrix<f64>, tol: f64, scale: f64) -> DMatrix<f64> {
    let c = a.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(c, c);
    }
    let (s, _, vt) = svd_padded(a);
    let cut = tol * s.amax().max(scale);
    let idx: Vec<usize> = (0..c).filter(|&i| s[i] <= cut).collect();
    vt.select_rows(idx.iter()).transpose()
}

/// Orthonormal basis (columns) of the column span of `a`, relative threshold.
pub fn col_span(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (r, c) = a.shape();
    if c == 0 || r == 0 {
        return DMatrix::zeros(r, 0);
    }
    let svd = svd(a);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.amax();
    if smax == 0.0 {
        return DMatrix::zeros(r, 0);
    }
    let idx: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > rel_tol * smax).collect();
    u.select_columns(idx.iter())
}

/// Orthonormal basis of the orthogonal complement of the column span of `a` in `R^rows`.
pub fn orthonormal_complement(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    null_space(&a.transpose(), rel_tol)
}

/// Minimum-norm least-squares solution of `a x = b` (column-wise).
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = svd(a);
    let smax = svd.singular_values.amax();
    let eps = (rel_tol * smax).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| DMatrix::zeros(a.ncols(), b.ncols()))
}
