//! Base mappings `f: R^n -> R^n`: a closed gallery of analytic maps, their
//! Jacobians, and the JSON map-spec format.
//!
//! A spec looks like
//!
//! ```json
//! {"kind": "power_radial", "dim": 2, "params": {"p": 1.0}}
//! {"kind": "composition", "dim": 2, "compose": [
//!     {"kind": "planar_rotation", "dim": 2, "params": {"theta": 0.3}},
//!     {"kind": "identity", "dim": 2}]}
//! ```
//!
//! Compositions apply their children right to left, so `compose: [g, h]` is `g ∘ h`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, norm, Point, SquareMatrix};

/// The closed set of map families.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Identity,
    /// `x ↦ Mx + b`; the offset is optional.
    Linear {
        matrix: DMatrix<f64>,
        offset: Option<Vec<f64>>,
    },
    /// `x ↦ |x|^p x` with `p > -1`.
    PowerRadial { p: f64 },
    /// Rotation by `theta` in the `(x1, x2)` plane, identity on the remaining axes.
    PlanarRotation { theta: f64 },
    /// `∇u` for `u(x) = a|x|²/2 + b|x|⁴/4`, i.e. `x ↦ (a + b|x|²) x`.
    ConvexGradientQuartic { a: f64, b: f64 },
    /// `children[0] ∘ children[1] ∘ ...`
    Composition(Vec<MapSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    dim: usize,
    kind: MapKind,
}

impl MapSpec {
    pub fn identity(dim: usize) -> Result<Self> {
        check_positive_dim(dim)?;
        Ok(MapSpec { dim, kind: MapKind::Identity })
    }

    pub fn linear(matrix: SquareMatrix) -> Result<Self> {
        let dim = matrix.dim();
        Ok(MapSpec { dim, kind: MapKind::Linear { matrix: matrix.into_inner(), offset: None } })
    }

    pub fn affine(matrix: SquareMatrix, offset: Vec<f64>) -> Result<Self> {
        let dim = matrix.dim();
        check_dim(dim, offset.len())?;
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("offset must be finite".into()));
        }
        Ok(MapSpec {
            dim,
            kind: MapKind::Linear { matrix: matrix.into_inner(), offset: Some(offset) },
        })
    }

    /// Pure translation `x ↦ x + b`.
    pub fn translation(offset: Vec<f64>) -> Result<Self> {
        check_positive_dim(offset.len())?;
        Self::affine(SquareMatrix::identity(offset.len()), offset)
    }

    pub fn power_radial(dim: usize, p: f64) -> Result<Self> {
        check_positive_dim(dim)?;
        if !(p.is_finite() && p > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "power_radial exponent must satisfy p > -1, got {p}"
            )));
        }
        Ok(MapSpec { dim, kind: MapKind::PowerRadial { p } })
    }

    pub fn planar_rotation(dim: usize, theta: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "planar_rotation needs dim >= 2, got {dim}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("rotation angle must be finite".into()));
        }
        Ok(MapSpec { dim, kind: MapKind::PlanarRotation { theta } })
    }

    pub fn convex_gradient_quartic(dim: usize, a: f64, b: f64) -> Result<Self> {
        check_positive_dim(dim)?;
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!("quartic coefficient a must be > 0, got {a}")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidParameter(format!("quartic coefficient b must be >= 0, got {b}")));
        }
        Ok(MapSpec { dim, kind: MapKind::ConvexGradientQuartic { a, b } })
    }

    pub fn composition(children: Vec<MapSpec>) -> Result<Self> {
        let first = children
            .first()
            .ok_or_else(|| Error::InvalidParameter("composition needs at least one child".into()))?;
        let dim = first.dim;
        for c in &children {
            check_dim(dim, c.dim)?;
        }
        Ok(MapSpec { dim, kind: MapKind::Composition(children) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MapKind::Identity => "identity",
            MapKind::Linear { .. } => "linear",
            MapKind::PowerRadial { .. } => "power_radial",
            MapKind::PlanarRotation { .. } => "planar_rotation",
            MapKind::ConvexGradientQuartic { .. } => "convex_gradient_quartic",
            MapKind::Composition(_) => "composition",
        }
    }

    /// Exponent `q` in the growth bound `|f(x)| ≤ α|x|^q + β`.
    pub fn growth_exponent(&self) -> f64 {
        match &self.kind {
            MapKind::Identity | MapKind::Linear { .. } | MapKind::PlanarRotation { .. } => 1.0,
            MapKind::PowerRadial { p } => p + 1.0,
            MapKind::ConvexGradientQuartic { b, .. } => {
                if *b > 0.0 {
                    3.0
                } else {
                    1.0
                }
            }
            MapKind::Composition(children) => children.iter().map(|c| c.growth_exponent()).product(),
        }
    }

    /// True when the Jacobian is symmetric everywhere (the map is a gradient).
    pub fn is_gradient_map(&self) -> bool {
        match &self.kind {
            MapKind::Identity | MapKind::PowerRadial { .. } | MapKind::ConvexGradientQuartic { .. } => {
                true
            }
            MapKind::Linear { matrix, .. } => matrix == &matrix.transpose(),
            MapKind::PlanarRotation { theta } => theta.sin() == 0.0,
            MapKind::Composition(children) => {
                children.len() == 1 && children[0].is_gradient_map()
            }
        }
    }

    /// Evaluates `f(x)` into `out`. Both slices must have length `dim`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            MapKind::Identity => out.copy_from_slice(x),
            MapKind::Linear { matrix, offset } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, xj) in x.iter().enumerate() {
                        acc += matrix[(i, j)] * xj;
                    }
                    *o = acc + offset.as_ref().map_or(0.0, |b| b[i]);
                }
            }
            MapKind::PowerRadial { p } => {
                let r = norm(x);
                if r == 0.0 {
                    out.fill(0.0);
                } else {
                    let s = r.powf(*p);
                    for (o, xi) in out.iter_mut().zip(x) {
                        *o = s * xi;
                    }
                }
            }
            MapKind::PlanarRotation { theta } => {
                let (s, c) = theta.sin_cos();
                out.copy_from_slice(x);
                out[0] = c * x[0] - s * x[1];
                out[1] = s * x[0] + c * x[1];
            }
            MapKind::ConvexGradientQuartic { a, b } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let s = a + b * r2;
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = s * xi;
                }
            }
            MapKind::Composition(children) => {
                let mut cur = x.to_vec();
                let mut next = vec![0.0; self.dim];
                for child in children.iter().rev() {
                    child.eval_into(&cur, &mut next);
                    std::mem::swap(&mut cur, &mut next);
                }
                out.copy_from_slice(&cur);
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// Analytic Jacobian `Df(x)`.
    pub fn jacobian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim;
        match &self.kind {
            MapKind::Identity => Ok(DMatrix::identity(n, n)),
            MapKind::Linear { matrix, .. } => Ok(matrix.clone()),
            MapKind::PowerRadial { p } => {
                let r = norm(x);
                if r == 0.0 {
                    return if *p > 0.0 {
                        Ok(DMatrix::zeros(n, n))
                    } else if *p == 0.0 {
                        Ok(DMatrix::identity(n, n))
                    } else {
                        Err(Error::SingularPoint(x.to_vec()))
                    };
                }
                // |x|^p (I + p x̂ x̂ᵀ)
                let s = r.powf(*p);
                let k = p / (r * r);
                Ok(DMatrix::from_fn(n, n, |i, j| {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    s * (delta + k * (x[i] * x[j]))
                }))
            }
            MapKind::PlanarRotation { theta } => {
                let (s, c) = theta.sin_cos();
                let mut m = DMatrix::identity(n, n);
                m[(0, 0)] = c;
                m[(0, 1)] = -s;
                m[(1, 0)] = s;
                m[(1, 1)] = c;
                Ok(m)
            }
            MapKind::ConvexGradientQuartic { a, b } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Ok(DMatrix::from_fn(n, n, |i, j| {
                    let delta = if i == j { a + b * r2 } else { 0.0 };
                    delta + 2.0 * b * (x[i] * x[j])
                }))
            }
            MapKind::Composition(children) => {
                let mut cur = x.to_vec();
                let mut next = vec![0.0; n];
                let mut jac = DMatrix::identity(n, n);
                for child in children.iter().rev() {
                    jac = child.jacobian_at(&cur)? * jac;
                    child.eval_into(&cur, &mut next);
                    std::mem::swap(&mut cur, &mut next);
                }
                Ok(jac)
            }
        }
    }

    /// Canonical JSON value of the map.
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("kind".into(), json!(self.kind_name()));
        obj.insert("dim".into(), json!(self.dim));
        match &self.kind {
            MapKind::Identity => {}
            MapKind::Linear { matrix, offset } => {
                let rows: Vec<Vec<f64>> = (0..self.dim)
                    .map(|i| matrix.row(i).iter().copied().collect())
                    .collect();
                let mut params = Map::new();
                params.insert("matrix".into(), json!(rows));
                if let Some(b) = offset {
                    params.insert("offset".into(), json!(b));
                }
                obj.insert("params".into(), Value::Object(params));
            }
            MapKind::PowerRadial { p } => {
                obj.insert("params".into(), json!({ "p": p }));
            }
            MapKind::PlanarRotation { theta } => {
                obj.insert("params".into(), json!({ "theta": theta }));
            }
            MapKind::ConvexGradientQuartic { a, b } => {
                obj.insert("params".into(), json!({ "a": a, "b": b }));
            }
            MapKind::Composition(children) => {
                obj.insert(
                    "compose".into(),
                    Value::Array(children.iter().map(|c| c.to_json()).collect()),
                );
            }
        }
        Value::Object(obj)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        short_hash(self.to_json().to_string().as_bytes())
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl Serialize for MapSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// A map between spaces of the same dimension, evaluated pointwise.
pub trait PointMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl PointMap for MapSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval(x))
    }
}

/// Adapts a closure to [`PointMap`].
pub struct FnMap<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> PointMap for FnMap<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.f)(x)
    }
}

pub(crate) fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}

fn check_positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidParameter("dimension must be >= 1".into()))
    } else {
        Ok(())
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    dim: usize,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default)]
    compose: Option<Vec<RawSpec>>,
}

fn param_f64(params: &Map<String, Value>, key: &str, kind: &str) -> Result<f64> {
    let v = params
        .get(key)
        .ok_or_else(|| Error::InvalidParameter(format!("{kind} requires params.{key}")))?;
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidParameter(format!("params.{key} must be a finite number")))
}

fn float_list(v: &Value, what: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidParameter(format!("{what} must be an array")))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .filter(|f| f.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("{what} entries must be finite numbers")))
        })
        .collect()
}

fn check_no_params(raw: &RawSpec) -> Result<()> {
    if raw.params.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{} takes no params", raw.kind)))
    }
}

fn from_raw(raw: RawSpec) -> Result<MapSpec> {
    if raw.kind != "composition" && raw.compose.is_some() {
        return Err(Error::MalformedSpec(format!("`compose` is only valid for composition, not {}", raw.kind)));
    }
    match raw.kind.as_str() {
        "identity" => {
            check_no_params(&raw)?;
            MapSpec::identity(raw.dim)
        }
        "linear" => {
            let rows_v = raw
                .params
                .get("matrix")
                .ok_or_else(|| Error::InvalidParameter("linear requires params.matrix".into()))?;
            let rows = rows_v
                .as_array()
                .ok_or_else(|| Error::InvalidParameter("params.matrix must be an array of rows".into()))?
                .iter()
                .map(|r| float_list(r, "matrix row"))
                .collect::<Result<Vec<_>>>()?;
            check_dim(raw.dim, rows.len())?;
            let m = SquareMatrix::from_rows(&rows)?;
            match raw.params.get("offset") {
                Some(off) => MapSpec::affine(m, float_list(off, "params.offset")?),
                None => MapSpec::linear(m),
            }
        }
        "power_radial" => MapSpec::power_radial(raw.dim, param_f64(&raw.params, "p", "power_radial")?),
        "planar_rotation" => {
            MapSpec::planar_rotation(raw.dim, param_f64(&raw.params, "theta", "planar_rotation")?)
        }
        "convex_gradient_quartic" => MapSpec::convex_gradient_quartic(
            raw.dim,
            param_f64(&raw.params, "a", "convex_gradient_quartic")?,
            param_f64(&raw.params, "b", "convex_gradient_quartic")?,
        ),
        "composition" => {
            check_no_params(&raw)?;
            let dim = raw.dim;
            let children = raw
                .compose
                .ok_or_else(|| Error::InvalidParameter("composition requires `compose`".into()))?
                .into_iter()
                .map(from_raw)
                .collect::<Result<Vec<_>>>()?;
            for c in &children {
                check_dim(dim, c.dim)?;
            }
            MapSpec::composition(children)
        }
        other => Err(Error::MalformedSpec(format!("unknown kind `{other}`"))),
    }
}

/// Parses and validates a JSON map spec.
pub fn parse_map_spec(text: &str) -> Result<MapSpec> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))?;
    from_raw(raw)
}

pub fn evaluate_map(spec: &MapSpec, x: &Point) -> Result<Point> {
    check_dim(spec.dim, x.dim())?;
    Ok(Point::from_vec_unchecked(spec.eval(x)))
}

pub fn evaluate_map_jacobian(spec: &MapSpec, x: &Point) -> Result<SquareMatrix> {
    check_dim(spec.dim, x.dim())?;
    Ok(SquareMatrix::from_matrix_unchecked(spec.jacobian_at(x)?))
}

/// Central-difference Jacobian with step `h = 1e-5 · max(1, |x|)`.
pub fn finite_difference_map_jacobian(spec: &MapSpec, x: &Point) -> Result<SquareMatrix> {
    check_dim(spec.dim, x.dim())?;
    let n = spec.dim;
    let h = 1e-5 * x.norm().max(1.0);
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        xp[j] = x[j] + h;
        spec.eval_into(&xp, &mut fp);
        xp[j] = x[j] - h;
        spec.eval_into(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEvaluation(x.to_vec()));
    }
    Ok(SquareMatrix::from_matrix_unchecked(jac))
}

/// Named delta-monotone maps used by the property suites.
pub fn gallery(dim: usize) -> Vec<(&'static str, MapSpec)> {
    assert!(dim >= 2, "gallery maps need dim >= 2");
    let mut linear = DMatrix::from_fn(dim, dim, |i, j| if i == j { 2.0 + i as f64 } else { 0.0 });
    linear[(0, 1)] = 0.5;
    let linear = SquareMatrix::new(linear).expect("finite");
    vec![
        ("identity", MapSpec::identity(dim).unwrap()),
        ("linear", MapSpec::linear(linear).unwrap()),
        ("power_radial_p1", MapSpec::power_radial(dim, 1.0).unwrap()),
        ("power_radial_p-0.5", MapSpec::power_radial(dim, -0.5).unwrap()),
        ("planar_rotation", MapSpec::planar_rotation(dim, std::f64::consts::FRAC_PI_4).unwrap()),
        ("convex_gradient_quartic", MapSpec::convex_gradient_quartic(dim, 1.0, 0.5).unwrap()),
        (
            "composition",
            MapSpec::composition(vec![
                MapSpec::planar_rotation(dim, std::f64::consts::PI / 8.0).unwrap(),
                MapSpec::power_radial(dim, 1.0).unwrap(),
            ])
            .unwrap(),
        ),
    ]
}
