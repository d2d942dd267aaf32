use super::RankOneAtom;
use crate::error::{Error, Result};
use crate::symlin::{self, SymMatrix};
use nalgebra::{DMatrix, DVector};

/// Relative eigenvalue cut used for "rank of X" throughout the peeling loop.
pub(crate) const RANK_TOL: f64 = 1e-8;

/// Image with a purely relative threshold, for blocks split off a larger matrix.
pub(crate) fn block_image(x: &SymMatrix) -> DMatrix<f64> {
    if x.norm() == 0.0 {
        return DMatrix::zeros(x.n(), 0);
    }
    symlin::eig(x).image_rel(1e-9)
}

/// Peeling state: the remaining matrix is `W Y Wᵀ` with `Y` positive definite.
pub(crate) struct Peeler {
    w: DMatrix<f64>,
    y: DMatrix<f64>,
    pub atoms: Vec<RankOneAtom>,
    pub trace: Vec<f64>,
}

impl Peeler {
    pub fn new(x: &SymMatrix) -> Self {
        let e = symlin::eig(x);
        let cut = RANK_TOL * e.values.amax().max(1.0);
        let idx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > cut).collect();
        let w = e.vectors.select_columns(idx.iter());
        let y = DMatrix::from_diagonal(&DVector::from_iterator(idx.len(), idx.iter().map(|&i| e.values[i])));
        Peeler { w, y, atoms: Vec::new(), trace: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.w.ncols()
    }

    pub fn current(&self) -> SymMatrix {
        SymMatrix::symmetrize(&self.w * &self.y * self.w.transpose())
    }

    /// `W Y^{1/2}`, a factor of the remaining matrix.
    pub fn factor(&self) -> DMatrix<f64> {
        let e = symlin::eig(&SymMatrix::symmetrize(self.y.clone()));
        let mut half = e.vectors.clone();
        for (j, mut c) in half.column_iter_mut().enumerate() {
            c *= e.values[j].max(0.0).sqrt();
        }
        &self.w * half
    }

    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::LineSearch { reason: reason.into(), trace: self.trace.clone() }
    }

    /// Removes `μ* x xᵀ` with the largest μ keeping the remainder PSD; `x` must lie in the image.
    pub fn step(&mut self, x: &DVector<f64>) -> Result<()> {
        let r = self.rank();
        if r == 0 {
            return Err(self.fail("nothing left to peel"));
        }
        let nx = x.norm();
        if !(nx > 0.0) || !nx.is_finite() {
            return Err(self.fail("oracle returned a zero or non-finite vector"));
        }
        let mut c = self.w.transpose() * (x / nx);
        let inside = c.norm();
        if inside < 1.0 - 1e-6 {
            return Err(self.fail(format!("oracle ray leaves the face (defect {:.3e})", 1.0 - inside)));
        }
        c /= inside;
        if r == 1 {
            let mu = self.y[(0, 0)];
            self.trace.push(mu);
            self.atoms.push(RankOneAtom::new(mu, &self.w * c));
            self.w = DMatrix::zeros(self.w.nrows(), 0);
            self.y = DMatrix::zeros(0, 0);
            return Ok(());
        }
        let chol = self.y.clone().cholesky().ok_or_else(|| self.fail("face Gram matrix lost definiteness"))?;
        let yc = chol.solve(&c);
        let mu = 1.0 / c.dot(&yc);
        self.trace.push(mu);
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(self.fail("non-positive boundary step"));
        }
        let rest = SymMatrix::symmetrize(&self.y - &c * c.transpose() * mu);
        let e = symlin::eig(&rest);
        let top = e.values[0].max(self.y.norm());
        if e.values[r - 1].abs() > 1e-7 * top {
            return Err(self.fail("boundary step did not lower the rank"));
        }
        if e.values[r - 2] <= 1e-13 * top {
            return Err(self.fail("boundary step lowered the rank by more than one"));
        }
        self.atoms.push(RankOneAtom::new(mu, &self.w * c));
        let keep: Vec<usize> = (0..r - 1).collect();
        self.w = &self.w * e.vectors.select_columns(keep.iter());
        self.y = DMatrix::from_diagonal(&e.values.rows(0, r - 1).into_owned());
        Ok(())
    }

    /// Peels until the remaining rank is at most `stop`.
    pub fn run(
        &mut self,
        stop: usize,
        oracle: &mut dyn FnMut(&SymMatrix, &DMatrix<f64>) -> Result<DVector<f64>>,
    ) -> Result<()> {
        while self.rank() > stop {
            let x = if self.rank() == 1 {
                self.w.column(0).into_owned()
            } else {
                oracle(&self.current(), &self.w)?
            };
            self.step(&x)?;
        }
        Ok(())
    }

    /// Eigen-atoms of whatever is left; valid when every remaining direction is a ray.
    pub fn drain_eigen(&mut self) {
        let e = symlin::eig(&SymMatrix::symmetrize(self.y.clone()));
        for (j, &lam) in e.values.iter().enumerate() {
            if lam > 0.0 {
                self.atoms.push(RankOneAtom::new(lam, &self.w * e.vectors.column(j)));
            }
        }
        self.w = DMatrix::zeros(self.w.nrows(), 0);
        self.y = DMatrix::zeros(0, 0);
    }
}
