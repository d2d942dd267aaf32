use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Complex Hermitian matrix; the lower triangle is the conjugate of the upper.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix(DMatrix<Complex64>);

impl HermMatrix {
    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        let asym = (&a - a.adjoint()).norm();
        if asym > 1e-10 * (1.0 + a.norm()) {
            return Err(Error::invalid(format!("matrix is not Hermitian (defect {asym:.3e})")));
        }
        Ok(Self::hermitize(a))
    }

    pub fn hermitize(a: DMatrix<Complex64>) -> Self {
        let n = a.nrows();
        let mut m = a;
        for i in 0..n {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        HermMatrix(m)
    }

    pub fn zeros(n: usize) -> Self {
        HermMatrix(DMatrix::zeros(n, n))
    }

    pub fn outer(x: &DVector<Complex64>) -> Self {
        Self::hermitize(x * x.adjoint())
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `Re tr(A B*)`
    pub fn dot(&self, other: &HermMatrix) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a * b.conj()).re).sum()
    }
}

#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: DVector<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// Hermitian eigen-decomposition, values descending.
pub fn eig_herm(a: &HermMatrix) -> HermEig {
    let n = a.n();
    if n == 0 {
        return HermEig { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) };
    }
    let se = a.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
    HermEig {
        values: DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i])),
        vectors: se.eigenvectors.select_columns(order.iter()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_rank_one_spectrum() {
        let i = Complex64::i();
        let x = DVector::from_vec(vec![Complex64::new(1.0, 0.0), i]);
        let h = HermMatrix::outer(&x);
        assert_eq!(h.matrix()[(0, 1)], -i);
        let e = eig_herm(&h);
        assert!((e.values[0] - 2.0).abs() < 1e-13 && e.values[1].abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ]);
        assert!(HermMatrix::new(m).is_err());
    }
}
