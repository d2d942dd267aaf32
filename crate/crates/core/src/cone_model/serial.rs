use super::{SpectrahedralCone, SPAN_TOL};
use crate::constructions::ConeExpr;
use crate::error::{Error, Result};
use crate::symlin::{col_span, svec, SymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Wire format: span basis matrices as upper-triangular rows (row-major, plain entries).
#[derive(Serialize, Deserialize)]
struct ConeJson {
    n: usize,
    span_basis: Vec<Vec<f64>>,
    generators: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expr: Option<ConeExpr>,
}

fn upper(m: &SymMatrix) -> Vec<f64> {
    let n = m.n();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(m.get(i, j));
        }
    }
    out
}

fn from_upper(n: usize, v: &[f64]) -> Result<SymMatrix> {
    if v.len() != n * (n + 1) / 2 {
        return Err(Error::DimensionMismatch { expected: n * (n + 1) / 2, found: v.len() });
    }
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    SymMatrix::new(m)
}

impl Serialize for SpectrahedralCone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConeJson {
            n: self.n,
            span_basis: self.span_basis().iter().map(upper).collect(),
            generators: self.generators.iter().map(|g| g.iter().copied().collect()).collect(),
            expr: self.expr.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectrahedralCone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ConeJson::deserialize(d)?;
        decode(raw).map_err(serde::de::Error::custom)
    }
}

fn decode(raw: ConeJson) -> Result<SpectrahedralCone> {
    let n = raw.n;
    let mats = raw.span_basis.iter().map(|v| from_upper(n, v)).collect::<Result<Vec<_>>>()?;
    let cols: Vec<DVector<f64>> = mats.iter().map(svec).collect();
    let basis = if cols.is_empty() {
        DMatrix::zeros(n * (n + 1) / 2, 0)
    } else {
        col_span(&DMatrix::from_columns(&cols), SPAN_TOL)
    };
    if let Some(e) = &raw.expr {
        e.validate()?;
        if e.size() != n {
            return Err(Error::DimensionMismatch { expected: n, found: e.size() });
        }
    }
    let gens: Vec<DVector<f64>> = raw.generators.iter().map(|g| DVector::from_column_slice(g)).collect();
    let cone = SpectrahedralCone::from_parts(n, basis, Vec::new(), raw.expr).with_generators(&gens)?;
    Ok(cone)
}
