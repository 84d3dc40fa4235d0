//! Jacobian of the extension.
//!
//! With `A(y) = Df(x + t y)` and the block matrix
//!
//! ```text
//! B(y) = [ A(y)      A(y) y    ]
//!        [ yᵀ A(y)   yᵀ A(y) y ]
//! ```
//!
//! the differential of the extension is `DF(x, t) = ∫ B(y) φ(y) dy`, which we
//! evaluate with the same quadrature nodes as `F` itself. A central-difference
//! Jacobian serves as the independent check.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::ExtensionField;
use crate::geometry::{check_dim, HalfSpacePoint, Point, SquareMatrix};
use crate::quadrature::ball::BallRule;
use crate::quadrature::SchemeParams;

pub const POWER_ITERATION_TOL: f64 = 1e-10;
pub const POWER_ITERATION_MAX: usize = 1000;

/// Writes `B(A, y)` into `out`, which must be `(n+1) × (n+1)`.
fn assemble_block(a: &DMatrix<f64>, y: &[f64], out: &mut DMatrix<f64>) {
    let n = y.len();
    let yv = DVector::from_column_slice(y);
    let ay = a * &yv;
    let yta = a.tr_mul(&yv);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    for i in 0..n {
        out[(i, n)] = ay[i];
        out[(n, i)] = yta[i];
    }
    out[(n, n)] = yv.dot(&ay);
}

pub fn block_matrix(a: &SquareMatrix, y: &Point) -> Result<SquareMatrix> {
    check_dim(a.dim(), y.dim())?;
    let n = a.dim();
    let mut out = DMatrix::zeros(n + 1, n + 1);
    assemble_block(a, y, &mut out);
    Ok(SquareMatrix::from_matrix_unchecked(out))
}

/// `DF(x, t) = Σ_i w_i B(Df(x + t y_i), y_i)` for `t > 0`.
pub fn extension_jacobian(field: &ExtensionField, p: &HalfSpacePoint) -> Result<SquareMatrix> {
    let n = field.base_dim();
    check_dim(n, p.dim())?;
    if p.height <= 0.0 {
        return Err(Error::NonpositiveHeight(p.height));
    }
    let t = p.height;
    let spec = field.spec();
    let scheme = field.scheme();
    let mut acc = DMatrix::zeros(n + 1, n + 1);
    let mut block = DMatrix::zeros(n + 1, n + 1);
    let mut z = vec![0.0; n];
    for (y, w) in scheme.nodes().zip(scheme.weights()) {
        for ((zi, xi), yi) in z.iter_mut().zip(p.base.iter()).zip(y) {
            *zi = xi + t * yi;
        }
        let a = spec.jacobian_at(&z)?;
        assemble_block(&a, y, &mut block);
        acc += *w * &block;
    }
    SquareMatrix::new(acc)
}

/// Central differences `(F(p + h e_j) - F(p - h e_j)) / 2h`, column by column.
pub fn finite_difference_jacobian<F>(f: F, p: &[f64], h: f64) -> Result<SquareMatrix>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = p.len();
    let mut jac = DMatrix::zeros(m, m);
    let mut q = p.to_vec();
    for j in 0..m {
        q[j] = p[j] + h;
        let fp = f(&q)?;
        q[j] = p[j] - h;
        let fm = f(&q)?;
        q[j] = p[j];
        check_dim(m, fp.len())?;
        check_dim(m, fm.len())?;
        if fp.iter().chain(&fm).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation(p.to_vec()));
        }
        for i in 0..m {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::NonFiniteEvaluation(p.to_vec()));
            }
            jac[(i, j)] = d;
        }
    }
    Ok(SquareMatrix::from_matrix_unchecked(jac))
}

/// Largest singular value by power iteration on `MᵀM`.
///
/// Stops when the Rayleigh quotient changes by less than `1e-10` relative and
/// the eigen-residual is below `1e-5` relative; gives up after 1000 steps.
pub fn operator_norm(m: &SquareMatrix) -> Result<f64> {
    let n = m.dim();
    if m.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let gram = m.tr_mul(m);
    let mut v = DVector::from_fn(n, |j, _| 1.0 / (1.0 + j as f64).sqrt());
    v /= v.norm();
    let mut prev = f64::NAN;
    for _ in 0..POWER_ITERATION_MAX {
        let w = &gram * &v;
        let lambda = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        let residual = (&w - lambda * &v).norm();
        if (lambda - prev).abs() <= POWER_ITERATION_TOL * lambda && residual <= 1e-5 * lambda {
            return Ok(lambda.sqrt());
        }
        prev = lambda;
        v = w / wn;
    }
    Err(Error::NoConvergence(POWER_ITERATION_MAX))
}

/// [`operator_norm`], falling back to a full SVD when iteration stalls.
pub fn spectral_norm(m: &SquareMatrix) -> f64 {
    operator_norm(m).unwrap_or_else(|_| {
        m.as_matrix()
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    })
}

/// `α = ∫_{B(0,1)} ‖Df(x + t y)‖ dy` at a point of the upper half-space.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaAverage {
    pub value: f64,
    pub center: HalfSpacePoint,
    pub scheme: SchemeParams,
}

pub fn unit_ball_norm_average(field: &ExtensionField, p: &HalfSpacePoint) -> Result<AlphaAverage> {
    let n = field.base_dim();
    check_dim(n, p.dim())?;
    if p.height <= 0.0 {
        return Err(Error::NonpositiveHeight(p.height));
    }
    let rule = BallRule::shared(n);
    let spec = field.spec();
    let t = p.height;
    // y ↦ x + t y over the unit ball is the ball B(x, t) with density scaled by t^{-n}
    let value = rule.try_integrate(&p.base, t, |z| {
        let a = SquareMatrix::from_matrix_unchecked(spec.jacobian_at(z)?);
        Ok::<_, Error>(spectral_norm(&a))
    })? / t.powi(n as i32);
    Ok(AlphaAverage { value, center: p.clone(), scheme: field.scheme().params() })
}

/// Row-major CSV dump of a matrix, preceded by one header line.
pub fn write_jacobian_csv<W: Write>(
    mut w: W,
    m: &SquareMatrix,
    p: &HalfSpacePoint,
    spec_hash: &str,
    scheme_hash: &str,
) -> Result<()> {
    let io = |e: std::io::Error| Error::Serialization(e.to_string());
    let x: Vec<String> = p.base.iter().map(|v| crate::extension::format_value(*v)).collect();
    writeln!(
        w,
        "# x={} t={} spec_hash={} scheme_hash={}",
        x.join(";"),
        crate::extension::format_value(p.height),
        spec_hash,
        scheme_hash
    )
    .map_err(io)?;
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| crate::extension::format_value(*v)).collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    Ok(())
}
