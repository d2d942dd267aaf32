use super::peel::block_image;
use crate::constructions::{cross_ratio_planes, intertwine_maps, moment_vector_homogeneous, quartic_lift, ConeExpr};
use crate::error::{Error, Result};
use crate::symlin::{self, lstsq, null_space, SymMatrix};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::{FRAC_PI_2, PI};

const ACCEPT: f64 = 1e-7;

fn unit_or_none(x: DVector<f64>) -> Option<DVector<f64>> {
    let n = x.norm();
    (n > 0.0 && n.is_finite()).then(|| x / n)
}

/// A ray of a leaf cone inside `span(W)`, `W` orthonormal.
pub(crate) fn leaf_ray(expr: &ConeExpr, w: &DMatrix<f64>) -> Result<DVector<f64>> {
    if w.ncols() == 0 {
        return Err(Error::NoRay);
    }
    match expr {
        ConeExpr::FullPsd { .. } => Ok(w.column(0).into_owned()),
        ConeExpr::Diagonal { n } => {
            let (best, proj) = (0..*n)
                .map(|i| (i, w.row(i).norm()))
                .fold((0, -1.0), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
            if proj < 1.0 - 1e-8 {
                return Err(Error::NoRay);
            }
            let mut e = DVector::zeros(*n);
            e[best] = 1.0;
            Ok(e)
        }
        ConeExpr::Hankel { n, m } => hankel_ray(*n, *m, w),
        ConeExpr::Codim1 { q } => codim1_ray(q, w),
        ConeExpr::TernaryQuartic => quartic_ray(w),
        ConeExpr::CrossRatio { angles } => plane_ray(&cross_ratio_planes(angles), w),
        ConeExpr::MomentCone { vectors } => vectors
            .iter()
            .filter_map(|v| unit_or_none(DVector::from_column_slice(v)))
            .find(|v| (w.transpose() * v).norm() > 1.0 - 1e-8)
            .ok_or(Error::NoRay),
        other => Err(Error::OracleUnavailable(other.kind_name().into())),
    }
}

/// Projection residual of the block `v(θ) ⊗ I_m` off `span(W)`: smallest singular
/// value (scaled by `‖v‖`) and the matching direction.
fn hankel_defect(n: usize, m: usize, w: &DMatrix<f64>, theta: f64) -> (f64, DVector<f64>) {
    let v = moment_vector_homogeneous(n, theta);
    let vn = v.norm();
    let b = v.kronecker(&DMatrix::<f64>::identity(m, m)) / vn;
    let resid = &b - w * (w.transpose() * &b);
    let g = SymMatrix::symmetrize(resid.transpose() * &resid);
    let e = symlin::eig(&g);
    let x = e.vectors.column(m - 1).into_owned();
    (e.values[m - 1].max(0.0).sqrt(), &b * x)
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn hankel_ray(n: usize, m: usize, w: &DMatrix<f64>) -> Result<DVector<f64>> {
    const GRID: usize = 1440;
    let step = PI / GRID as f64;
    let f = |t: f64| hankel_defect(n, m, w, t).0;
    let vals: Vec<f64> = (0..GRID).map(|k| f(-FRAC_PI_2 + k as f64 * step)).collect();
    let mut minima: Vec<usize> = (0..GRID)
        .filter(|&k| vals[k] <= vals[(k + GRID - 1) % GRID] && vals[k] <= vals[(k + 1) % GRID])
        .collect();
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut best: Option<(f64, f64)> = None;
    for &k in minima.iter().take(8) {
        let centre = -FRAC_PI_2 + k as f64 * step;
        let t = golden_min(&f, centre - step, centre + step);
        let val = f(t);
        if best.map_or(true, |(bv, _)| val < bv) {
            best = Some((val, t));
        }
    }
    match best {
        Some((val, t)) if val < ACCEPT => Ok(hankel_defect(n, m, w, t).1),
        _ => Err(Error::NoRay),
    }
}

fn codim1_ray(q: &SymMatrix, w: &DMatrix<f64>) -> Result<DVector<f64>> {
    let qh = SymMatrix::symmetrize(w.transpose() * q.matrix() * w);
    let e = symlin::eig(&qh);
    let r = w.ncols();
    let scale = e.values.amax().max(1e-300);
    let (top, bottom) = (e.values[0], e.values[r - 1]);
    let z = if top > 1e-12 * scale && bottom < -1e-12 * scale {
        e.vectors.column(0) / top.sqrt() + e.vectors.column(r - 1) / (-bottom).sqrt()
    } else {
        let k = (0..r).min_by(|&a, &b| e.values[a].abs().total_cmp(&e.values[b].abs())).unwrap();
        if e.values[k].abs() > 1e-8 * q.norm().max(1.0) {
            return Err(Error::NoRay);
        }
        e.vectors.column(k).into_owned()
    };
    unit_or_none(w * z).ok_or(Error::NoRay)
}

fn sphere_points(count: usize) -> Vec<DVector<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

fn quartic_ray(w: &DMatrix<f64>) -> Result<DVector<f64>> {
    let proj = DMatrix::<f64>::identity(6, 6) - w * w.transpose();
    let lift = |u: &DVector<f64>| quartic_lift(&[u[0], u[1], u[2]]);
    let resid = |u: &DVector<f64>| {
        let s = lift(u);
        (&proj * &s).norm() / s.norm()
    };
    let jac = |u: &DVector<f64>| {
        let (a, b, c) = (u[0], u[1], u[2]);
        DMatrix::from_row_slice(
            6,
            3,
            &[2.0 * a, 0.0, 0.0, 0.0, 2.0 * b, 0.0, 0.0, 0.0, 2.0 * c, 0.0, c, b, c, 0.0, a, b, a, 0.0],
        )
    };
    let mut starts: Vec<(f64, DVector<f64>)> = sphere_points(240).into_iter().map(|u| (resid(&u), u)).collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, DVector<f64>)> = None;
    for (_, start) in starts.into_iter().take(16) {
        let mut u = start;
        let mut lambda = 1e-3;
        let mut cur = resid(&u);
        for _ in 0..100 {
            if cur < 1e-15 {
                break;
            }
            let tangent = null_space(&DMatrix::from_row_slice(1, 3, u.as_slice()), 1e-12);
            let j = &proj * jac(&u) * &tangent;
            let r = &proj * lift(&u);
            let jtj = j.transpose() * &j;
            let g = j.transpose() * &r;
            let mut improved = false;
            for _ in 0..12 {
                let a = &jtj + DMatrix::identity(2, 2) * lambda;
                let Some(d) = a.lu().solve(&(-&g)) else { break };
                let trial = (&u + &tangent * d).normalize();
                let val = resid(&trial);
                if val < cur {
                    u = trial;
                    cur = val;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().map_or(true, |(bv, _)| cur < *bv) {
            best = Some((cur, u));
        }
        if cur < 1e-12 {
            break;
        }
    }
    match best {
        Some((val, u)) if val < ACCEPT => Ok(lift(&u).normalize()),
        _ => Err(Error::NoRay),
    }
}

fn plane_ray(planes: &[DMatrix<f64>], w: &DMatrix<f64>) -> Result<DVector<f64>> {
    let mut best: Option<(f64, DVector<f64>)> = None;
    for p in planes {
        let stacked = DMatrix::from_fn(w.nrows(), w.ncols() + p.ncols(), |i, j| {
            if j < w.ncols() {
                w[(i, j)]
            } else {
                -p[(i, j - w.ncols())]
            }
        });
        let svd = crate::symlin::svd(&stacked);
        let vt = svd.v_t.unwrap();
        let k = svd.singular_values.len();
        let (smin, idx) = if stacked.ncols() > k {
            (0.0, None)
        } else {
            let i = svd.singular_values.imin();
            (svd.singular_values[i], Some(i))
        };
        let z: DVector<f64> = match idx {
            Some(i) => vt.row(i).transpose(),
            None => symlin::null_space(&stacked, 1e-12).column(0).into_owned(),
        };
        let x = p * z.rows(w.ncols(), p.ncols());
        if x.norm() < 1e-6 {
            continue;
        }
        if best.as_ref().map_or(true, |(bv, _)| smin < *bv) {
            best = Some((smin, x.normalize()));
        }
    }
    match best {
        Some((val, x)) if val < 1e-8 => Ok(x),
        _ => Err(Error::NoRay),
    }
}

fn pad(x: &DVector<f64>, offset: usize, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    out.rows_mut(offset, x.len()).copy_from(x);
    out
}

fn sub_block(x: &SymMatrix, offset: usize, size: usize) -> SymMatrix {
    SymMatrix::symmetrize(x.matrix().view((offset, offset), (size, size)).into_owned())
}

/// Splits `X` in an intertwined cone into `(X1, X2)` with `X = f1 X1 f1ᵀ + f2 X2 f2ᵀ`.
pub(crate) fn split_intertwined(
    first: usize,
    second: usize,
    glue: &crate::constructions::GlueSpec,
    x: &SymMatrix,
) -> Result<(SymMatrix, SymMatrix, DMatrix<f64>, DMatrix<f64>)> {
    let maps = intertwine_maps(first, second, glue)?;
    let inv = maps.split.clone().try_inverse().ok_or_else(|| Error::numerical("singular split basis"))?;
    let mut m = inv.clone() * x.matrix() * inv.transpose();
    let (a, _, c) = maps.blocks;
    let n = m.nrows();
    let scale = 1.0 + m.norm();
    let corner = m.view((0, n - c), (a, c)).norm();
    if corner > 1e-7 * scale {
        return Err(Error::numerical(format!(
            "matrix leaves the intertwined span (corner block {corner:.3e})"
        )));
    }
    m.view_mut((0, n - c), (a, c)).fill(0.0);
    m.view_mut((n - c, 0), (c, a)).fill(0.0);
    let (c1, c2) = symlin::schur_split(&SymMatrix::symmetrize(m.clone()), maps.blocks)?;
    let b = maps.blocks.1;
    let mut m1 = m.view((0, 0), (a + b, a + b)).into_owned();
    m1.view_mut((a, a), (b, b)).copy_from(c1.matrix());
    let mut m2 = m.view((a, a), (b + c, b + c)).into_owned();
    m2.view_mut((0, 0), (b, b)).copy_from(c2.matrix());
    let x1 = SymMatrix::symmetrize(m1).congruence(&maps.head);
    let x2 = SymMatrix::symmetrize(m2).congruence(&maps.tail);
    Ok((x1, x2, maps.f1, maps.f2))
}

/// A ray of the cone of `expr` inside the image of `x`, which must lie in that cone.
pub(crate) fn face_ray(expr: &ConeExpr, x: &SymMatrix, w: &DMatrix<f64>) -> Result<DVector<f64>> {
    if w.ncols() == 0 {
        return Err(Error::NoRay);
    }
    let tiny = |m: &SymMatrix| m.norm() <= 1e-10 * x.norm();
    match expr {
        ConeExpr::Tridiag { n } => face_ray(&crate::constructions::ChordalGraph::path(*n).construction_tree(), x, w),
        ConeExpr::Chordal { graph } => face_ray(&graph.construction_tree(), x, w),
        ConeExpr::DirectSum { children } => {
            let n = expr.size();
            let mut offset = 0;
            for child in children {
                let s = child.size();
                let block = sub_block(x, offset, s);
                if !tiny(&block) {
                    let y = face_ray(child, &block, &block_image(&block))?;
                    return Ok(pad(&y, offset, n));
                }
                offset += s;
            }
            Err(Error::NoRay)
        }
        ConeExpr::FullExtension { child, .. } => {
            let c = child.size();
            let top = sub_block(x, 0, c);
            if tiny(&top) {
                return Ok(w.column(0).into_owned());
            }
            let v = face_ray(child, &top, &block_image(&top))?;
            let wt = w.rows(0, c).into_owned();
            let a = lstsq(&wt, &DMatrix::from_column_slice(c, 1, v.as_slice()), 1e-12);
            let h: DVector<f64> = (w * a).column(0).into_owned();
            if (h.rows(0, c) - &v).norm() > 1e-7 {
                return Err(Error::numerical("leading ray does not lift into the face"));
            }
            Ok(h)
        }
        ConeExpr::Intertwining { first, second, glue } => {
            let (x1, x2, f1, f2) = split_intertwined(first.size(), second.size(), glue, x)?;
            if !tiny(&x1) {
                Ok(f1 * face_ray(first, &x1, &block_image(&x1))?)
            } else {
                Ok(f2 * face_ray(second, &x2, &block_image(&x2))?)
            }
        }
        ConeExpr::Congruence { child, forward, inverse } => {
            let xc = x.congruence(&inverse.0);
            Ok(&forward.0 * face_ray(child, &xc, &block_image(&xc))?)
        }
        leaf => leaf_ray(leaf, w),
    }
}
