//! The Gaussian-kernel extension `F: R^{n+1} -> R^{n+1}` of a base map `f`.
//!
//! For `t > 0`
//!
//! ```text
//! F^i(x, t)     = ∫ f^i(x + t y) φ(y) dy
//! F^{n+1}(x, t) = ∫ <f(x + t y), y> φ(y) dy
//! ```
//!
//! evaluated with a [`QuadratureScheme`]. On the hyperplane `F(x, 0) = (f(x), 0)`
//! is evaluated directly, and below it `F^i(x, -t) = F^i(x, t)`,
//! `F^{n+1}(x, -t) = -F^{n+1}(x, t)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dot, HalfSpacePoint, Point};
use crate::map::{MapSpec, PointMap};
use crate::quadrature::QuadratureScheme;

#[derive(Debug, Clone)]
pub struct ExtensionField {
    spec: MapSpec,
    scheme: QuadratureScheme,
}

impl ExtensionField {
    pub fn new(spec: MapSpec, scheme: QuadratureScheme) -> Result<Self> {
        check_dim(spec.dim(), scheme.dim())?;
        Ok(ExtensionField { spec, scheme })
    }

    /// Uses [`QuadratureScheme::default_for`] at the map's dimension.
    pub fn with_default_scheme(spec: MapSpec, seed: u64) -> Result<Self> {
        let scheme = QuadratureScheme::default_for(spec.dim(), seed)?;
        Self::new(spec, scheme)
    }

    /// Dimension `n` of the base map.
    pub fn base_dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn scheme(&self) -> &QuadratureScheme {
        &self.scheme
    }

    /// `F(x, t)` for `t > 0` by quadrature.
    fn upper(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.base_dim();
        let mut z = vec![0.0; n];
        self.scheme.integrate_into(n + 1, |y, out| {
            for ((zi, xi), yi) in z.iter_mut().zip(x).zip(y) {
                *zi = xi + t * yi;
            }
            let (head, tail) = out.split_at_mut(n);
            self.spec.eval_into(&z, head);
            tail[0] = dot(head, y);
        })
    }

    /// `F` at a point of `R^{n+1}` given as `n + 1` coordinates.
    pub fn eval_lifted(&self, p: &[f64]) -> Result<Vec<f64>> {
        let n = self.base_dim();
        check_dim(n + 1, p.len())?;
        let (x, t) = (&p[..n], p[n]);
        if t == 0.0 {
            let mut out = self.spec.eval(x);
            out.push(0.0);
            return Ok(out);
        }
        let mut out = self.upper(x, t.abs())?;
        if t < 0.0 {
            out[n] = -out[n];
        }
        Ok(out)
    }

    /// `F^{n+1}(x, t)`.
    pub fn vertical(&self, p: &HalfSpacePoint) -> Result<f64> {
        Ok(extend_point(self, p)?[self.base_dim()])
    }
}

impl PointMap for ExtensionField {
    fn dim(&self) -> usize {
        self.base_dim() + 1
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval_lifted(x)
    }
}

pub fn extend_point(field: &ExtensionField, p: &HalfSpacePoint) -> Result<Point> {
    check_dim(field.base_dim(), p.dim())?;
    let mut q = p.base.to_vec();
    q.push(p.height);
    field.eval_lifted(&q).map(Point::from_vec_unchecked)
}

/// The trivial lift `(x, t) ↦ (g(x), t)`.
#[derive(Debug, Clone)]
pub struct TrivialExtension(pub MapSpec);

impl PointMap for TrivialExtension {
    fn dim(&self) -> usize {
        self.0.dim() + 1
    }

    fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        let n = self.0.dim();
        check_dim(n + 1, p.len())?;
        let mut out = self.0.eval(&p[..n]);
        out.push(p[n]);
        Ok(out)
    }
}

/// Rows of `(input, F(input))`, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionTable {
    pub dim: usize,
    pub rows: Vec<(HalfSpacePoint, Point)>,
}

impl ExtensionTable {
    pub fn columns(&self) -> Vec<String> {
        let n = self.dim;
        let mut cols: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        cols.push("t".into());
        cols.extend((1..=n).map(|i| format!("F{i}")));
        cols.push("Fn1".into());
        cols
    }

    fn flat_row(&self, i: usize) -> Vec<f64> {
        let (p, v) = &self.rows[i];
        let mut row = p.base.to_vec();
        row.push(p.height);
        row.extend_from_slice(v);
        row
    }

    /// CSV with header `x1..xn,t,F1..Fn,Fn1`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(self.columns())?;
        for i in 0..self.rows.len() {
            wtr.write_record(self.flat_row(i).iter().map(|v| format_value(*v)))?;
        }
        wtr.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with the CSV column order.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<f64>> = (0..self.rows.len()).map(|i| self.flat_row(i)).collect();
        json!({ "columns": self.columns(), "rows": rows })
    }
}

/// Evaluates every grid point; the first failing row (in grid order) is reported.
pub fn extend_grid(field: &ExtensionField, grid: &[HalfSpacePoint]) -> Result<ExtensionTable> {
    let results: Vec<Result<Point>> = grid.par_iter().map(|p| extend_point(field, p)).collect();
    let mut rows = Vec::with_capacity(grid.len());
    for (index, (p, r)) in grid.iter().zip(results).enumerate() {
        let v = r.map_err(|e| Error::Row { index, source: Box::new(e) })?;
        rows.push((p.clone(), v));
    }
    Ok(ExtensionTable { dim: field.base_dim(), rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorTag {
    Bilipschitz,
    DeltaMonotone,
}

/// Extension of `g_1 ∘ g_2 ∘ ... ∘ g_k`: delta-monotone factors are lifted by
/// the Gaussian extension, bi-Lipschitz ones by `(x, t) ↦ (g(x), t)`, and the
/// lifts are applied right to left.
pub fn compose_qcd_extension(
    factors: &[(FactorTag, MapSpec)],
    scheme: &QuadratureScheme,
    p: &HalfSpacePoint,
) -> Result<Point> {
    let n = p.dim();
    check_dim(scheme.dim(), n)?;
    for (_, spec) in factors {
        check_dim(n, spec.dim())?;
    }
    let mut cur = p.lifted().into_vec();
    for (tag, spec) in factors.iter().rev() {
        cur = match tag {
            FactorTag::DeltaMonotone => {
                ExtensionField::new(spec.clone(), scheme.clone())?.eval_lifted(&cur)?
            }
            FactorTag::Bilipschitz => TrivialExtension(spec.clone()).apply(&cur)?,
        };
    }
    Ok(Point::from_vec_unchecked(cur))
}

/// Formats a value for tables: rounded to 15 significant digits, printed in
/// shortest form, with `-0` written as `0`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    format!("{rounded}")
}
