use crate::constructions::is_block_toeplitz;
use crate::error::{Error, Result};
use crate::serde_util;
use crate::symlin::{eig_herm, HermMatrix};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `weight · v v*` with `v = (u, uq, …, uq^{n−1})` of unit length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexAtom {
    pub weight: f64,
    #[serde(with = "serde_util::cvec")]
    pub vector: DVector<Complex64>,
    /// Block ratio, `|q| = 1`.
    pub ratio: [f64; 2],
}

impl ComplexAtom {
    pub fn q(&self) -> Complex64 {
        Complex64::new(self.ratio[0], self.ratio[1])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexDecomposition {
    pub atoms: Vec<ComplexAtom>,
    pub residual: f64,
}

const PENCIL_ANGLES: [f64; 4] = [0.7, 1.9, 2.6, 0.3];

/// Splits a PSD block-Toeplitz matrix of rank N into N atoms `(v, vq, …, vq^{n−1})`.
pub fn decompose_block_toeplitz(t: &HermMatrix, n: usize, m: usize) -> Result<ComplexDecomposition> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("block sizes must be positive"));
    }
    if t.n() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: t.n() });
    }
    if !is_block_toeplitz(t, n, m, 1e-8) {
        return Err(Error::invalid("matrix is not block-Toeplitz"));
    }
    let e = eig_herm(t);
    let scale = 1.0 + t.norm();
    if e.values.iter().any(|&l| l < -1e-8 * scale) {
        return Err(Error::invalid("matrix is not positive semidefinite"));
    }
    let cut = 1e-8 * e.values.amax().max(1.0);
    let idx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > cut).collect();
    let rank = idx.len();
    if rank == 0 {
        return Ok(ComplexDecomposition { atoms: Vec::new(), residual: t.norm() });
    }
    let mut w = e.vectors.select_columns(idx.iter());
    for (j, &i) in idx.iter().enumerate() {
        w.column_mut(j).scale_mut(e.values[i].sqrt());
    }
    let cols = if n == 1 {
        w
    } else {
        let rows = (n - 1) * m;
        let wu = w.rows(0, rows).into_owned();
        let wl = w.rows(m, rows).into_owned();
        let u = polar(&(wu.adjoint() * &wl))?;
        let miss = (&wu * &u - &wl).norm();
        if miss > 1e-6 * scale {
            return Err(Error::numerical(format!("shift is not unitary on the factor (misfit {miss:.3e})")));
        }
        &w * diagonalize_unitary(&u)?
    };
    let mut atoms = Vec::with_capacity(rank);
    for g in cols.column_iter() {
        let g = g.into_owned();
        let norm = g.norm();
        let q = block_ratio(&g, n, m);
        atoms.push(ComplexAtom {
            weight: norm * norm,
            vector: g.map(|z| z / norm),
            ratio: [q.re, q.im],
        });
    }
    let mut r = t.matrix().clone();
    for a in &atoms {
        r -= &a.vector * a.vector.adjoint() * Complex64::new(a.weight, 0.0);
    }
    Ok(ComplexDecomposition { atoms, residual: r.norm() })
}

fn polar(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let svd = a.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => Ok(u * vt),
        _ => Err(Error::numerical("SVD failed in the polar factor")),
    }
}

/// Unitary `V` with `V* U V` diagonal, via a Hermitian combination of the real and imaginary parts.
fn diagonalize_unitary(u: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let ua = u.adjoint();
    let re = (u + &ua) * Complex64::new(0.5, 0.0);
    let im = (u - &ua) * Complex64::new(0.0, -0.5);
    let mut best: Option<(f64, DMatrix<Complex64>)> = None;
    for &ang in &PENCIL_ANGLES {
        let (s, c) = f64::sin_cos(ang);
        let h = HermMatrix::hermitize(&re * Complex64::new(c, 0.0) + &im * Complex64::new(s, 0.0));
        let v = eig_herm(&h).vectors;
        let d = v.adjoint() * u * &v;
        let off = (0..d.nrows())
            .flat_map(|i| (0..d.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| d[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < 1e-9 {
            return Ok(v);
        }
        if best.as_ref().map_or(true, |(b, _)| off < *b) {
            best = Some((off, v));
        }
    }
    match best {
        Some((off, v)) if off < 1e-6 => Ok(v),
        Some((off, _)) => Err(Error::numerical(format!("shift could not be diagonalized (off-diagonal {off:.3e})"))),
        None => Err(Error::numerical("empty shift")),
    }
}

/// Least-squares ratio between consecutive blocks, normalized to the unit circle.
fn block_ratio(g: &DVector<Complex64>, n: usize, m: usize) -> Complex64 {
    if n == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let rows = (n - 1) * m;
    let a = g.rows(0, rows);
    let b = g.rows(m, rows);
    let q = a.dotc(&b) / Complex64::new(a.norm_squared(), 0.0);
    q / q.norm()
}
