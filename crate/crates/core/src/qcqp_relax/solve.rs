use super::{induced_cone, QcqpProblem};
use crate::cone_model::{face_interior, face_span, SpectrahedralCone};
use crate::error::Result;
use crate::sdp::{self, Block, Options, Problem};
use crate::symlin::{eig_sym, smat, svec, SymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const FLOOR: f64 = -1e12;
const GAP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSolution {
    #[serde(rename = "X")]
    pub x: SymMatrix,
    /// Absent when infeasible.
    pub objective: Option<f64>,
    pub status: SdpStatus,
    /// Barrier bound `m/t` at exit.
    pub duality_gap: f64,
    /// Largest of primal infeasibility, PSD violation and the stationarity residual.
    pub kkt_residual: f64,
}

/// Coordinates of the relaxation on the minimal face of the PSD cone containing `K`.
struct Frame {
    mats: Vec<SymMatrix>,
    local: Vec<DMatrix<f64>>,
    tau: DVector<f64>,
    cv: DVector<f64>,
    bv: DVector<f64>,
}

impl Frame {
    fn new(p: &QcqpProblem, k: &SpectrahedralCone, h: &DMatrix<f64>) -> Frame {
        let n = k.n();
        let span = face_span(k, h);
        let mats: Vec<SymMatrix> = span.column_iter().map(|c| smat(&c.into_owned(), n)).collect();
        let local: Vec<DMatrix<f64>> = mats.iter().map(|m| h.transpose() * m.matrix() * h).collect();
        let d = mats.len();
        let tau = DVector::from_iterator(d, local.iter().map(|l| l.trace()));
        let cv = DVector::from_iterator(d, mats.iter().map(|m| m.dot(p.cost())));
        let bv = DVector::from_iterator(d, mats.iter().map(|m| m.dot(p.normalization())));
        Frame { mats, local, tau, cv, bv }
    }

    fn matrix(&self, y: &DVector<f64>) -> SymMatrix {
        let n = self.mats[0].n();
        let m = self.mats.iter().zip(y.iter()).fold(DMatrix::zeros(n, n), |acc, (b, c)| acc + b.matrix() * *c);
        SymMatrix::symmetrize(m)
    }

    fn psd_block(&self) -> Block {
        let r = self.local[0].nrows();
        Block { f0: DMatrix::zeros(r, r), fs: self.local.clone() }
    }

    /// Maximizes `⟨B,X⟩` on the trace slice; returns the maximizer and its value.
    fn phase1(&self, y0: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let prob = Problem {
            blocks: vec![self.psd_block()],
            c: -&self.bv,
            a: DMatrix::from_row_slice(1, self.tau.len(), self.tau.as_slice()),
            b: DVector::from_element(1, 1.0),
        };
        let sol = sdp::solve(&prob, y0.clone(), Options { gap: GAP, ..Options::default() })?;
        Ok((sol.y, -sol.value))
    }

    fn phase2(&self, start: &DVector<f64>, radius: f64) -> Result<sdp::Solution> {
        let bound = Block {
            f0: DMatrix::from_element(1, 1, radius),
            fs: self.tau.iter().map(|t| DMatrix::from_element(1, 1, -t)).collect(),
        };
        let prob = Problem {
            blocks: vec![self.psd_block(), bound],
            c: self.cv.clone(),
            a: DMatrix::from_row_slice(1, self.bv.len(), self.bv.as_slice()),
            b: DVector::from_element(1, 1.0),
        };
        sdp::solve(&prob, start.clone(), Options { gap: GAP, floor: FLOOR, ..Options::default() })
    }

    /// Stationarity residual at a barrier iterate with parameter `t`.
    fn stationarity(&self, y: &DVector<f64>, t: f64, radius: f64) -> f64 {
        let xl = self.local.iter().zip(y.iter()).fold(DMatrix::zeros(self.local[0].nrows(), self.local[0].ncols()), |acc, (l, c)| acc + l * *c);
        let Some(chol) = xl.cholesky() else { return f64::INFINITY };
        let z = chol.inverse() / t;
        let rho = 1.0 / (t * (radius - self.tau.dot(y)));
        let g = DVector::from_iterator(self.local.len(), self.local.iter().map(|l| z.component_mul(l).sum()));
        let base = &self.cv + &self.tau * rho - g;
        let lambda = self.bv.dot(&base) / self.bv.norm_squared().max(f64::MIN_POSITIVE);
        (base - &self.bv * lambda).norm() / (1.0 + self.cv.norm())
    }
}

fn primal_residual(p: &QcqpProblem, x: &SymMatrix) -> Result<f64> {
    let lmin = eig_sym(x)?.values.min();
    let scale = x.norm().max(1.0);
    let hom = p.constraints().iter().map(|a| a.dot(x).abs() / a.norm().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    Ok(hom.max((p.normalization().dot(x) - 1.0).abs()).max((-lmin / scale).max(0.0)))
}

fn infeasible(n: usize) -> SdpSolution {
    SdpSolution { x: SymMatrix::zeros(n), objective: None, status: SdpStatus::Infeasible, duality_gap: 0.0, kkt_residual: 0.0 }
}

/// Solves `min ⟨S,X⟩ : X ∈ K, ⟨B,X⟩ = 1` by a log-barrier path on the minimal face containing `K`.
///
/// A trace bound far outside the start keeps the barrier problems compact; when the optimum
/// presses against it the solve is repeated with a larger bound to tell unbounded problems
/// (value keeps dropping) from unattained infima (`max-iter`).
pub fn solve_relaxation(p: &QcqpProblem) -> Result<SdpSolution> {
    let k = induced_cone(p)?;
    let n = p.n();
    let Some((x0, _, h)) = face_interior(&k, &DMatrix::identity(n, n))? else {
        return Ok(infeasible(n));
    };
    let frame = Frame::new(p, &k, &h);
    if frame.mats.is_empty() {
        return Ok(infeasible(n));
    }
    let span = DMatrix::from_columns(&frame.mats.iter().map(svec).collect::<Vec<_>>());
    let mut y0 = span.transpose() * svec(&x0);
    y0 /= frame.tau.dot(&y0);

    let bscale = p.normalization().norm().max(f64::MIN_POSITIVE);
    let b0 = frame.bv.dot(&y0);
    let y = if b0 > 1e-9 * bscale {
        y0
    } else {
        let (y1, bmax) = frame.phase1(&y0)?;
        if bmax <= 1e-9 * bscale {
            return Ok(infeasible(n));
        }
        // stay away from the boundary: move only half way towards the maximizer's value
        let b1 = frame.bv.dot(&y1);
        let theta = ((0.5 * b1 - b0) / (b1 - b0)).clamp(0.0, 1.0);
        &y0 + (&y1 - &y0) * theta
    };
    let start = &y / frame.bv.dot(&y);
    let radius = 1e3 * frame.tau.dot(&start).max(1.0);

    let mut sol = frame.phase2(&start, radius)?;
    let mut used = radius;
    let mut status = SdpStatus::Optimal;
    if sol.hit_floor {
        status = SdpStatus::Unbounded;
    } else if frame.tau.dot(&sol.y) >= 0.1 * radius {
        let wide = frame.phase2(&start, 10.0 * radius)?;
        let drop = sol.value - wide.value;
        let scale = 1.0 + sol.value.abs();
        if wide.hit_floor || drop > 1e-3 * scale {
            status = SdpStatus::Unbounded;
        } else if drop > 1e-6 * scale {
            status = SdpStatus::MaxIter;
        }
        if status != SdpStatus::Optimal {
            sol = wide;
            used = 10.0 * radius;
        }
    }
    let x = frame.matrix(&sol.y);
    let blocks = (h.ncols() + 1) as f64;
    let t = blocks / sol.gap;
    let kkt = primal_residual(p, &x)?.max(frame.stationarity(&sol.y, t, used));
    Ok(SdpSolution { objective: Some(sol.value), x, status, duality_gap: sol.gap, kkt_residual: kkt })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(s: SymMatrix, b: SymMatrix, a: Vec<SymMatrix>) -> QcqpProblem {
        QcqpProblem::new(s, b, a).unwrap()
    }

    #[test]
    fn trace_normalization() {
        let sol = solve_relaxation(&prob(SymMatrix::identity(2), SymMatrix::identity(2), vec![])).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective.unwrap() - 1.0).abs() < 1e-8);
        assert!(sol.kkt_residual < 1e-6);
    }

    #[test]
    fn zero_normalization_is_infeasible() {
        let sol = solve_relaxation(&prob(SymMatrix::identity(2), SymMatrix::zeros(2), vec![])).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn unbounded_off_diagonal_cost() {
        let s = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let b = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let sol = solve_relaxation(&prob(s, b, vec![])).unwrap();
        assert_eq!(sol.status, SdpStatus::Unbounded);
    }

    #[test]
    fn recession_direction_with_attained_optimum() {
        // X11 = 1, cost X11: optimum 1 while X22 is free to grow
        let sol = solve_relaxation(&prob(SymMatrix::from_diagonal(&[1.0, 0.0]), SymMatrix::from_diagonal(&[1.0, 0.0]), vec![]))
            .unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn indefinite_normalization_needs_phase_one() {
        let s = SymMatrix::identity(2);
        let b = SymMatrix::from_diagonal(&[1.0, -3.0]);
        let sol = solve_relaxation(&prob(s, b, vec![])).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        // rank-one optimum at x = e1
        assert!((sol.objective.unwrap() - 1.0).abs() < 1e-7);
    }
}
