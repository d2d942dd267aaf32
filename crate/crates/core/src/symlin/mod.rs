//! Dense symmetric and Hermitian linear algebra.
//!
//! Real symmetric eigenproblems use cyclic Jacobi, which keeps small
//! eigenvalues accurate; every rank and PSD decision in the crate goes
//! through this module.

mod dense;
mod herm;

pub use dense::{col_span, lstsq, null_space, null_space_scaled, orthonormal_complement, smat, svd, svec, svec_len};
pub use herm::{eig_herm, HermEig, HermMatrix};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-8;

const JACOBI_MAX_SWEEPS: usize = 80;

/// Real symmetric matrix. Symmetry is exact: the lower triangle mirrors the upper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts `a` if it is symmetric to `1e-10·(1+‖a‖)`, then averages the triangles.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let asym = (&a - a.transpose()).norm();
        if asym > 1e-10 * (1.0 + a.norm()) {
            return Err(Error::invalid(format!("matrix is not symmetric (asymmetry {asym:.3e})")));
        }
        Ok(Self::symmetrize(a))
    }

    /// Takes the symmetric part without checking.
    pub fn symmetrize(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut m = a;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// `x xᵀ`
    pub fn outer(x: &DVector<f64>) -> Self {
        SymMatrix(x * x.transpose())
    }

    /// `x yᵀ + y xᵀ`
    pub fn sym_outer(x: &DVector<f64>, y: &DVector<f64>) -> Self {
        let m = x * y.transpose();
        SymMatrix(&m + m.transpose())
    }

    /// `A M Aᵀ`
    pub fn congruence(&self, a: &DMatrix<f64>) -> Self {
        Self::symmetrize(a * &self.0 * a.transpose())
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.0.row(i).iter().copied().collect()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Spectral decomposition `A = V diag(values) Vᵀ`, values descending.
#[derive(Clone, Debug)]
pub struct EigDecomp {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigDecomp {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut vd = self.vectors.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= self.values[j];
        }
        vd * self.vectors.transpose()
    }

    /// Orthonormal basis of the span of eigenvectors with `|λ| > tol·max(1,|λ|max)`.
    pub fn image(&self, tol: f64) -> DMatrix<f64> {
        let cut = tol * self.values.amax().max(1.0);
        self.select(|v| v.abs() > cut)
    }

    /// Same as [`image`](Self::image) with a purely relative threshold.
    pub fn image_rel(&self, tol: f64) -> DMatrix<f64> {
        let cut = tol * self.values.amax();
        self.select(|v| v.abs() > cut)
    }

    fn select(&self, keep: impl Fn(f64) -> bool) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.values.len()).filter(|&i| keep(self.values[i])).collect();
        self.vectors.select_columns(idx.iter())
    }
}

/// Cyclic Jacobi eigen-decomposition.
pub fn eig_sym(a: &SymMatrix) -> Result<EigDecomp> {
    let n = a.n();
    let mut m = a.0.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm();
    if n == 0 || scale == 0.0 {
        return Ok(EigDecomp { values: DVector::zeros(n), vectors: v });
    }
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                if apq.abs() < 1e-300 || (apq.abs() * 1e18 < app.abs() && apq.abs() * 1e18 < aqq.abs()) {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() > 1e-13 * scale {
            return Err(Error::numerical(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal {:.3e})",
                off.sqrt()
            )));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = DVector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let vectors = v.select_columns(order.iter());
    Ok(EigDecomp { values, vectors })
}

/// Eigen-decomposition for internal use where the input is known finite and
/// symmetric; falls back to nalgebra if Jacobi fails to converge.
pub(crate) fn eig(a: &SymMatrix) -> EigDecomp {
    match eig_sym(a) {
        Ok(e) => e,
        Err(_) => {
            let se = a.0.clone().symmetric_eigen();
            let n = a.n();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
            EigDecomp {
                values: DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i])),
                vectors: se.eigenvectors.select_columns(order.iter()),
            }
        }
    }
}

/// Number of eigenvalues with `|λ| > tol·max(1, |λ|max)`.
pub fn numeric_rank(a: &SymMatrix, tol: f64) -> usize {
    let e = eig(a);
    let cut = tol * e.values.amax().max(1.0);
    e.values.iter().filter(|v| v.abs() > cut).count()
}

/// `λmin(A) ≥ −tol·(1+‖A‖_F)`.
pub fn psd_check(a: &SymMatrix, tol: f64) -> bool {
    let e = eig(a);
    let min = e.values.iter().copied().fold(f64::INFINITY, f64::min);
    a.n() == 0 || min >= -tol * (1.0 + a.norm())
}

/// Moore–Penrose inverse; eigenvalues below `tol·|λ|max` are treated as zero.
pub fn pseudo_inverse(a: &SymMatrix, tol: f64) -> SymMatrix {
    let e = eig(a);
    let cut = tol * e.values.amax();
    let n = a.n();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in e.values.iter().enumerate() {
        if lam.abs() > cut && lam != 0.0 {
            let v = e.vectors.column(k);
            out += (v * v.transpose()) / lam;
        }
    }
    SymMatrix::symmetrize(out)
}

/// Splits the middle block of a PSD matrix `[[A,B,0],[Bᵀ,C,D],[0,Dᵀ,E]]`
/// into `C1 = Bᵀ A† B` and `C2 = C − C1`, so that `[[A,B],[Bᵀ,C1]]` and
/// `[[C2,D],[Dᵀ,E]]` are both PSD.
pub fn schur_split(m: &SymMatrix, blocks: (usize, usize, usize)) -> Result<(SymMatrix, SymMatrix)> {
    let (a, b, c) = blocks;
    let n = a + b + c;
    if m.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.n() });
    }
    let mm = m.matrix();
    let scale = 1.0 + m.norm();
    let corner = mm.view((0, a + b), (a, c)).norm();
    if corner > 1e-9 * scale {
        return Err(Error::invalid(format!("corner block is not zero (norm {corner:.3e})")));
    }
    if !psd_check(m, DEFAULT_TOL) {
        return Err(Error::invalid("matrix is not positive semidefinite"));
    }
    let ablk = SymMatrix::symmetrize(mm.view((0, 0), (a, a)).into_owned());
    let bblk = mm.view((0, a), (a, b)).into_owned();
    let cblk = mm.view((a, a), (b, b)).into_owned();
    let c1 = if a == 0 {
        SymMatrix::zeros(b)
    } else {
        // cut relative to the whole matrix: a block that is pure rounding noise must not be inverted
        let e = eig(&ablk);
        let cut = 1e-10 * e.values.amax().max(m.norm());
        let mut ap = DMatrix::zeros(a, a);
        for (k, &lam) in e.values.iter().enumerate() {
            if lam > cut {
                let v = e.vectors.column(k);
                ap += (v * v.transpose()) / lam;
            }
        }
        SymMatrix::symmetrize(bblk.transpose() * ap * &bblk)
    };
    let c2 = SymMatrix::symmetrize(cblk - c1.matrix());
    Ok((c1, c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::symmetrize(DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)))
    }

    fn random_psd(n: usize, r: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        let g = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0));
        SymMatrix::symmetrize(&g * g.transpose())
    }

    #[test]
    fn identity_and_diagonal_spectra() {
        let e = eig_sym(&SymMatrix::identity(3)).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let e = eig_sym(&SymMatrix::from_diagonal(&[2.0, 0.0, -1.0])).unwrap();
        assert_eq!(e.values.as_slice(), &[2.0, 0.0, -1.0]);
    }

    #[test]
    fn rank_one_spectrum_matches_closed_form() {
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let e = eig_sym(&SymMatrix::outer(&x)).unwrap();
        assert!((e.values[0] - 5.0).abs() < 1e-13 && e.values[1].abs() < 1e-13);
        let top = e.vectors.column(0);
        let dir = x / 5f64.sqrt();
        assert!((top.dot(&dir).abs() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn jacobi_reconstruction_bounds_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10_000 {
            let n = 1 + trial % 12;
            let a = random_sym(n, &mut rng);
            let e = eig_sym(&a).unwrap();
            let rec = (e.reconstruct() - a.matrix()).norm();
            assert!(rec <= 1e-10 * (1.0 + a.norm()), "n={n} rec={rec}");
            let orth = (e.vectors.transpose() * &e.vectors - DMatrix::identity(n, n)).norm();
            assert!(orth <= 1e-10);
            assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn numeric_rank_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(numeric_rank(&SymMatrix::zeros(4), DEFAULT_TOL), 0);
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        assert_eq!(numeric_rank(&SymMatrix::outer(&x), DEFAULT_TOL), 1);
        assert_eq!(numeric_rank(&random_psd(5, 3, &mut rng), DEFAULT_TOL), 3);
    }

    #[test]
    fn psd_check_examples() {
        assert!(psd_check(&SymMatrix::identity(2), DEFAULT_TOL));
        assert!(!psd_check(&SymMatrix::from_diagonal(&[1.0, -1.0]), DEFAULT_TOL));
        let lorentz = SymMatrix::from_rows(&[vec![1.6, 0.8], vec![0.8, 0.4]]).unwrap();
        assert!(psd_check(&lorentz, DEFAULT_TOL));
    }

    #[test]
    fn penrose_identities() {
        let p = pseudo_inverse(&SymMatrix::from_diagonal(&[2.0, 0.0]), DEFAULT_TOL);
        assert_eq!(p, SymMatrix::from_diagonal(&[0.5, 0.0]));
        assert_eq!(pseudo_inverse(&SymMatrix::identity(3), DEFAULT_TOL), SymMatrix::identity(3));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_psd(4, 2, &mut rng);
            let ap = pseudo_inverse(&a, DEFAULT_TOL);
            let (am, pm) = (a.matrix(), ap.matrix());
            let rel = |x: DMatrix<f64>, y: &DMatrix<f64>| (x - y).norm() / (1.0 + y.norm());
            assert!(rel(am * pm * am, am) < 1e-8);
            assert!(rel(pm * am * pm, pm) < 1e-8);
            assert!(rel((am * pm).transpose(), &(am * pm)) < 1e-8);
            assert!(rel((pm * am).transpose(), &(pm * am)) < 1e-8);
        }
    }

    #[test]
    fn schur_split_examples() {
        let (c1, c2) = schur_split(&SymMatrix::identity(3), (1, 1, 1)).unwrap();
        assert_eq!(c1.get(0, 0), 0.0);
        assert_eq!(c2.get(0, 0), 1.0);

        let arrow = SymMatrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        let (c1, c2) = schur_split(&arrow, (1, 1, 1)).unwrap();
        assert!((c1.get(0, 0) - 1.0).abs() < 1e-14 && (c2.get(0, 0) - 1.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g1 = DMatrix::from_fn(4, 3, |_, _| rng.gen_range(-1.0..1.0));
            let g2 = DMatrix::from_fn(4, 3, |_, _| rng.gen_range(-1.0..1.0));
            let mut m = DMatrix::zeros(6, 6);
            m.view_mut((0, 0), (4, 4)).copy_from(&(&g1 * g1.transpose()));
            let mut tail = m.view_mut((2, 2), (4, 4));
            tail += &g2 * g2.transpose();
            let m = SymMatrix::symmetrize(m);
            let (c1, c2) = schur_split(&m, (2, 2, 2)).unwrap();
            let mid = m.matrix().view((2, 2), (2, 2)).into_owned();
            assert!((c1.matrix() + c2.matrix() - mid).norm() < 1e-12);
            let mut top = m.matrix().view((0, 0), (4, 4)).into_owned();
            top.view_mut((2, 2), (2, 2)).copy_from(c1.matrix());
            let mut bot = m.matrix().view((2, 2), (4, 4)).into_owned();
            bot.view_mut((0, 0), (2, 2)).copy_from(c2.matrix());
            assert!(psd_check(&SymMatrix::symmetrize(top), DEFAULT_TOL));
            assert!(psd_check(&SymMatrix::symmetrize(bot), DEFAULT_TOL));
        }
    }

    #[test]
    fn schur_split_rejects_bad_corner() {
        let m = SymMatrix::from_rows(&[
            vec![2.0, 0.0, 1.0],
            vec![0.0, 2.0, 0.0],
            vec![1.0, 0.0, 2.0],
        ])
        .unwrap();
        assert!(matches!(schur_split(&m, (1, 1, 1)), Err(Error::InvalidInput(_))));
    }
}
