use crate::constructions::Rows;
use crate::error::{Error, Result};
use crate::symlin::{col_span, null_space, null_space_scaled, SymMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The pair of forms spanning `Q1 + λQ2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pencil {
    #[serde(alias = "Q1")]
    pub q1: SymMatrix,
    #[serde(alias = "Q2")]
    pub q2: SymMatrix,
}

impl Pencil {
    pub fn new(q1: SymMatrix, q2: SymMatrix) -> Result<Self> {
        if q1.n() != q2.n() {
            return Err(Error::DimensionMismatch { expected: q1.n(), found: q2.n() });
        }
        Ok(Pencil { q1, q2 })
    }

    pub fn n(&self) -> usize {
        self.q1.n()
    }

    /// Gram determinant test for linear independence of the two forms.
    pub fn independent(&self) -> bool {
        let (a, b) = (&self.q1, &self.q2);
        let g = a.dot(a) * b.dot(b) - a.dot(b).powi(2);
        g > 1e-12 * a.dot(a) * b.dot(b)
    }
}

/// One block `(H_k, φ_k, Φ_k)`: on `H_k`, `Q1 = cos φ_k Φ_k` and `Q2 = sin φ_k Φ_k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PencilBlock {
    /// Orthonormal basis of `H_k`, one column per vector.
    pub basis: Rows,
    pub phi: f64,
    /// `Φ_k` in the coordinates of `basis`.
    pub form: SymMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PencilDecomposition {
    /// Joint kernel `H_0`.
    pub kernel: Rows,
    pub blocks: Vec<PencilBlock>,
}

impl PencilDecomposition {
    /// Basis `T = [H_0 | H_1 | …]` of `R^n`.
    pub fn frame(&self) -> DMatrix<f64> {
        let mut cols: Vec<DVector<f64>> = self.kernel.0.column_iter().map(|c| c.into_owned()).collect();
        for b in &self.blocks {
            cols.extend(b.basis.0.column_iter().map(|c| c.into_owned()));
        }
        DMatrix::from_columns(&cols)
    }

    /// Block-diagonal forms `(⊕ cos φ_k Φ_k, ⊕ sin φ_k Φ_k)` in frame coordinates.
    pub fn block_forms(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.kernel.0.nrows();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, n);
        let mut at = self.kernel.0.ncols();
        for blk in &self.blocks {
            let d = blk.form.n();
            a.view_mut((at, at), (d, d)).copy_from(&(blk.form.matrix() * blk.phi.cos()));
            b.view_mut((at, at), (d, d)).copy_from(&(blk.form.matrix() * blk.phi.sin()));
            at += d;
        }
        (a, b)
    }

    /// `max(‖TᵀQ1T − A‖, ‖TᵀQ2T − B‖)` with `(A, B)` the block forms.
    pub fn reconstruction_error(&self, p: &Pencil) -> f64 {
        let t = self.frame();
        let (a, b) = self.block_forms();
        let e1 = (t.transpose() * p.q1.matrix() * &t - a).norm();
        let e2 = (t.transpose() * p.q2.matrix() * &t - b).norm();
        e1.max(e2)
    }
}

fn angle_mod_pi(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    if PI - r < 1e-12 {
        0.0
    } else {
        r
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Simultaneous block decomposition of a pencil with a full real eigenbasis.
pub fn pencil_decompose(p: &Pencil, rng: &mut impl Rng) -> Result<PencilDecomposition> {
    let n = p.n();
    let q1 = p.q1.matrix();
    let q2 = p.q2.matrix();
    let scale = p.q1.norm().max(p.q2.norm());
    if scale == 0.0 {
        return Ok(PencilDecomposition { kernel: Rows(DMatrix::identity(n, n)), blocks: Vec::new() });
    }
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked.rows_mut(0, n).copy_from(q1);
    stacked.rows_mut(n, n).copy_from(q2);
    let h0 = null_space_scaled(&stacked, 1e-10, scale);
    let comp = null_space(&h0.transpose(), 1e-12);
    let comp = if h0.ncols() == 0 { DMatrix::identity(n, n) } else { comp };
    let r = comp.ncols();
    let a = comp.transpose() * q1 * &comp;
    let b = comp.transpose() * q2 * &comp;

    let mut chosen = None;
    for _ in 0..20 {
        let t: f64 = rng.gen_range(0.0..PI);
        let (al, be) = (t.cos(), t.sin());
        let pm = &a * al + &b * be;
        let sv = crate::symlin::svd(&pm).singular_values;
        if sv.min() > 1e-8 * sv.max() {
            chosen = Some((al, be, pm));
            break;
        }
    }
    let (al, be, pm) = chosen.ok_or_else(|| Error::NotStructured("no invertible member of the pencil".into()))?;
    let pinv = pm.clone().try_inverse().ok_or_else(|| Error::NotStructured("singular pencil member".into()))?;
    let op = &pinv * &b;
    let ev = op.complex_eigenvalues();
    let opn = op.norm().max(1.0);
    let mut mus: Vec<f64> = Vec::with_capacity(r);
    for z in ev.iter() {
        if z.im.abs() > 1e-7 * opn {
            return Err(Error::NotStructured(format!("complex eigenvalue {z}")));
        }
        mus.push(z.re);
    }
    mus.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for mu in mus {
        match clusters.last_mut() {
            Some(c) if (mu - c[c.len() - 1]).abs() <= 1e-6 * mu.abs().max(1.0) => c.push(mu),
            _ => clusters.push(vec![mu]),
        }
    }
    let mut blocks = Vec::new();
    let mut total = 0;
    for c in &clusters {
        let mu = c.iter().sum::<f64>() / c.len() as f64;
        // P⁻¹B x = μ x  ⇔  (B − μP) x = 0, and tan φ = μα / (1 − μβ)
        let phi = angle_mod_pi((mu * al).atan2(1.0 - mu * be));
        let (s, co) = phi.sin_cos();
        let ker = null_space_scaled(&(&a * s - &b * co), 1e-7, scale);
        if ker.ncols() != c.len() {
            return Err(Error::NotStructured(format!(
                "eigenvalue {mu:.6} has multiplicity {} but eigenspace dimension {}",
                c.len(),
                ker.ncols()
            )));
        }
        total += ker.ncols();
        let basis = col_span(&(&comp * &ker), 1e-12);
        let form = SymMatrix::symmetrize(basis.transpose() * (q1 * co + q2 * s) * &basis);
        blocks.push(PencilBlock { basis: Rows(basis), phi, form });
    }
    if total != r {
        return Err(Error::NotStructured("eigenvectors do not span the space".into()));
    }
    blocks.sort_by(|x, y| x.phi.total_cmp(&y.phi));
    for w in blocks.windows(2) {
        if angle_gap(w[0].phi, w[1].phi) <= 1e-7 {
            return Err(Error::NotStructured("two blocks share an angle".into()));
        }
    }
    for blk in &blocks {
        let ev = crate::symlin::eig(&blk.form).values;
        if ev.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min) <= 1e-8 * scale {
            return Err(Error::NotStructured(format!("degenerate block at angle {:.6}", blk.phi)));
        }
    }
    let out = PencilDecomposition { kernel: Rows(h0), blocks };
    let err = out.reconstruction_error(p);
    if err > 1e-7 * scale.max(1.0) {
        return Err(Error::NotStructured(format!("reconstruction error {err:.3e}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pencil(a: &[f64], b: &[f64]) -> Pencil {
        Pencil::new(SymMatrix::from_diagonal(a), SymMatrix::from_diagonal(b)).unwrap()
    }

    #[test]
    fn split_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = pencil_decompose(&pencil(&[1.0, 0.0], &[0.0, 1.0]), &mut rng).unwrap();
        let phis: Vec<f64> = d.blocks.iter().map(|b| b.phi).collect();
        assert!(phis[0].abs() < 1e-12 && (phis[1] - PI / 2.0).abs() < 1e-12);
        for b in &d.blocks {
            assert!((b.form.get(0, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_forms_give_one_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = pencil_decompose(&pencil(&[1.0, 1.0], &[1.0, 1.0]), &mut rng).unwrap();
        assert_eq!(d.blocks.len(), 1);
        assert!((d.blocks[0].phi - PI / 4.0).abs() < 1e-12);
        let f = d.blocks[0].form.matrix();
        assert!((f - DMatrix::identity(2, 2) * 2f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn joint_kernel_is_split_off() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = pencil_decompose(&pencil(&[1.0, 1.0, 0.0], &[1.0, -1.0, 0.0]), &mut rng).unwrap();
        assert_eq!(d.kernel.0.ncols(), 1);
        assert!((d.kernel.0[(2, 0)].abs() - 1.0).abs() < 1e-12);
        let phis: Vec<f64> = d.blocks.iter().map(|b| b.phi).collect();
        assert!((phis[0] - PI / 4.0).abs() < 1e-10 && (phis[1] - 3.0 * PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_pencil_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q1 = SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let q2 = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            pencil_decompose(&Pencil::new(q1, q2).unwrap(), &mut rng),
            Err(Error::NotStructured(_))
        ));
    }
}
