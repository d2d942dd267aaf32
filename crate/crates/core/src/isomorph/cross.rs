use crate::cone_model::SpectrahedralCone;
use crate::error::{Error, Result};
use crate::symlin::{col_span, null_space, SymMatrix};
use nalgebra::{DMatrix, DVector};

fn det2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Cross ratio of four points of the projective line given by homogeneous coordinates.
/// With `p = (cos φ, sin φ)` this equals the cotangent form
/// `(cot φ1 − cot φ3)(cot φ2 − cot φ4) / ((cot φ2 − cot φ3)(cot φ1 − cot φ4))`.
pub fn cross_ratio_points(p: &[[f64; 2]; 4]) -> Result<f64> {
    for (i, a) in p.iter().enumerate() {
        let na = a[0].hypot(a[1]);
        if na == 0.0 {
            return Err(Error::invalid(format!("point {i} is zero")));
        }
        for (j, b) in p.iter().enumerate().skip(i + 1) {
            let nb = b[0].hypot(b[1]);
            if det2(*a, *b).abs() <= 1e-12 * na * nb {
                return Err(Error::invalid(format!("undefined cross ratio: points {i} and {j} coincide")));
            }
        }
    }
    Ok(det2(p[0], p[2]) * det2(p[1], p[3]) / (det2(p[1], p[2]) * det2(p[0], p[3])))
}

pub fn cross_ratio(phi: [f64; 4]) -> Result<f64> {
    cross_ratio_points(&phi.map(|a| [a.cos(), a.sin()]))
}

/// The six values `λ` takes under reordering the four points.
pub fn s4_orbit(l: f64) -> [f64; 6] {
    [l, 1.0 - l, 1.0 / l, 1.0 / (1.0 - l), l / (l - 1.0), (l - 1.0) / l]
}

pub fn same_s4_orbit(a: f64, b: f64) -> bool {
    s4_orbit(a).iter().any(|x| (x - b).abs() <= 1e-9 * x.abs().max(b.abs()).max(1.0))
}

/// Two-dimensional subspaces spanned by pairs of generators whose symmetric product lies in L.
/// `None` once more than `cap` distinct planes turn up.
pub(crate) fn generator_planes(k: &SpectrahedralCone, cap: usize) -> Option<Vec<DMatrix<f64>>> {
    let gens = k.generators();
    let mut planes: Vec<DMatrix<f64>> = Vec::new();
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            let (a, b) = (&gens[i], &gens[j]);
            let p = col_span(&DMatrix::from_columns(&[a.clone(), b.clone()]), 1e-8);
            if p.ncols() < 2 {
                continue;
            }
            let s = SymMatrix::sym_outer(a, b);
            if k.dist_to_span(&s) > 1e-7 * s.norm() {
                continue;
            }
            if planes.iter().any(|q| same_subspace(q, &p)) {
                continue;
            }
            planes.push(p);
            if planes.len() > cap {
                return None;
            }
        }
    }
    Some(planes)
}

fn same_subspace(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.ncols() == b.ncols() && (a * a.transpose() - b * b.transpose()).norm() < 1e-7
}

/// Unit vector spanning `P ∩ Q` when that intersection is a line.
pub(crate) fn plane_meet(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<DVector<f64>> {
    let mut m = DMatrix::zeros(p.nrows(), p.ncols() + q.ncols());
    m.columns_mut(0, p.ncols()).copy_from(p);
    m.columns_mut(p.ncols(), q.ncols()).copy_from(&(-q));
    let ns = null_space(&m, 1e-8);
    if ns.ncols() != 1 {
        return None;
    }
    let v = p * ns.column(0).rows(0, p.ncols());
    let nv = v.norm();
    (nv > 1e-8).then(|| v / nv)
}

/// Cross ratio of a plane meeting four other planes in four distinct lines, read off
/// from the certificate. This is the congruence invariant separating members of the
/// one-parameter family; `None` when no such configuration is visible.
pub fn plane_star_invariant(k: &SpectrahedralCone) -> Option<f64> {
    let planes = generator_planes(k, 24)?;
    for (c, centre) in planes.iter().enumerate() {
        let lines: Vec<DVector<f64>> =
            planes.iter().enumerate().filter(|(o, _)| *o != c).filter_map(|(_, q)| plane_meet(centre, q)).collect();
        if lines.len() != 4 {
            continue;
        }
        let pts: Vec<[f64; 2]> = lines
            .iter()
            .map(|l| {
                let x = centre.transpose() * l;
                [x[0], x[1]]
            })
            .collect();
        if let Ok(l) = cross_ratio_points(&[pts[0], pts[1], pts[2], pts[3]]) {
            return Some(l);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::cross_ratio_cone;

    fn acot(c: f64) -> f64 {
        std::f64::consts::FRAC_PI_2 - c.atan()
    }

    #[test]
    fn cotangent_examples() {
        let l = cross_ratio([0.0, 1.0, 2.0, 3.0].map(acot)).unwrap();
        assert!((l - 4.0 / 3.0).abs() < 1e-12);
        let h = cross_ratio([acot(1.0), acot(-1.0), acot(0.0), 0.0]).unwrap();
        assert!((h + 1.0).abs() < 1e-12);
        assert!(same_s4_orbit(h, 2.0) && same_s4_orbit(h, 0.5));
        let swapped = cross_ratio([1.0, 0.0, 2.0, 3.0].map(acot)).unwrap();
        assert!((swapped - 0.75).abs() < 1e-12);
        assert!(cross_ratio([0.3, 0.3 + std::f64::consts::PI, 1.0, 2.0]).is_err());
    }

    #[test]
    fn invariant_of_cross_ratio_cone() {
        let phi = [0.2, 0.9, 1.7, 2.5];
        let k = cross_ratio_cone(&phi).unwrap();
        let l = plane_star_invariant(&k).unwrap();
        assert!(same_s4_orbit(l, cross_ratio(phi).unwrap()));
    }
}
