use crate::error::{Error, Result};
use crate::symlin::{col_span, HermMatrix};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex Hermitian block-Toeplitz PSD cone `Toep(n,m)` in `H^{nm}`.
#[derive(Clone, Debug)]
pub struct HermitianCone {
    pub n: usize,
    pub m: usize,
    /// Real coordinates (see [`hvec`]) of an orthonormal basis of the span, one per column.
    basis: DMatrix<f64>,
    generators: Vec<DVector<Complex64>>,
}

/// Isometric real coordinates of a Hermitian matrix under `⟨A,B⟩ = Re tr(AB*)`.
pub(crate) fn hvec(a: &HermMatrix) -> DVector<f64> {
    let n = a.n();
    let m = a.matrix();
    let r2 = 2f64.sqrt();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in (i + 1)..n {
            out.push(r2 * m[(i, j)].re);
            out.push(r2 * m[(i, j)].im);
        }
    }
    DVector::from_vec(out)
}

/// `(v, vq, …, vq^{n−1})`
pub fn toeplitz_atom(v: &DVector<Complex64>, q: Complex64, n: usize) -> DVector<Complex64> {
    let m = v.len();
    let mut out = DVector::zeros(n * m);
    let mut p = Complex64::new(1.0, 0.0);
    for b in 0..n {
        out.rows_mut(b * m, m).copy_from(&(v * p));
        p *= q;
    }
    out
}

/// Whether `t` is block-Toeplitz with `n×n` blocks of size `m`, to `tol·(1+‖t‖)`.
pub fn is_block_toeplitz(t: &HermMatrix, n: usize, m: usize, tol: f64) -> bool {
    if t.n() != n * m {
        return false;
    }
    let a = t.matrix();
    let lim = tol * (1.0 + t.norm());
    for r in 0..n {
        for c in 0..n {
            if r == 0 || c == 0 {
                continue;
            }
            let here = a.view((r * m, c * m), (m, m));
            let prev = a.view(((r - 1) * m, (c - 1) * m), (m, m));
            if (here - prev).norm() > lim {
                return false;
            }
        }
    }
    true
}

impl HermitianCone {
    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    pub fn generators(&self) -> &[DVector<Complex64>] {
        &self.generators
    }

    pub fn size(&self) -> usize {
        self.n * self.m
    }

    pub fn dist_to_span(&self, a: &HermMatrix) -> f64 {
        let v = hvec(a);
        let c = self.basis.transpose() * &v;
        (v - &self.basis * c).norm()
    }

    /// Real span dimension of the generator outer products.
    pub fn certificate_rank(&self) -> usize {
        let cols: Vec<DVector<f64>> = self.generators.iter().map(|g| hvec(&HermMatrix::outer(g))).collect();
        col_span(&DMatrix::from_columns(&cols), 1e-9).ncols()
    }
}

pub fn block_toeplitz_cone(n: usize, m: usize) -> Result<HermitianCone> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("block sizes must be positive"));
    }
    let size = n * m;
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let mut mats: Vec<HermMatrix> = Vec::new();
    for lag in 0..n {
        let scalars: &[Complex64] = if lag == 0 { &[one] } else { &[one, i] };
        for a in 0..m {
            for b in 0..m {
                if lag == 0 && b < a {
                    continue;
                }
                for &s in scalars {
                    let phases: &[Complex64] = if lag == 0 && a != b { &[one, i] } else { &[one] };
                    for &ph in phases {
                        let mut t = DMatrix::<Complex64>::zeros(size, size);
                        for r in 0..(n - lag) {
                            let c = r + lag;
                            t[(r * m + a, c * m + b)] += s * ph;
                            t[(c * m + b, r * m + a)] += (s * ph).conj();
                        }
                        if lag == 0 && a == b {
                            for r in 0..n {
                                t[(r * m + a, r * m + a)] = one;
                            }
                        }
                        mats.push(HermMatrix::hermitize(t));
                    }
                }
            }
        }
    }
    let cols: Vec<DVector<f64>> = mats.iter().map(hvec).collect();
    let basis = col_span(&DMatrix::from_columns(&cols), 1e-10);

    let mut vs: Vec<DVector<Complex64>> = Vec::new();
    let e = |k: usize| {
        let mut v = DVector::zeros(m);
        v[k] = one;
        v
    };
    for a in 0..m {
        vs.push(e(a));
        for b in (a + 1)..m {
            vs.push(e(a) + e(b));
            vs.push(e(a) + e(b) * i);
        }
    }
    let nodes = 2 * n - 1;
    let mut generators = Vec::new();
    for k in 0..nodes {
        let q = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.25) / nodes as f64);
        for v in &vs {
            let g = toeplitz_atom(v, q, n);
            let nrm = g.norm();
            generators.push(g / Complex64::new(nrm, 0.0));
        }
    }
    let cone = HermitianCone { n, m, basis, generators };
    if cone.certificate_rank() != cone.dimension() {
        return Err(Error::numerical("block-Toeplitz certificate does not span the cone"));
    }
    Ok(cone)
}
