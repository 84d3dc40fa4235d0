//! Hyperbolic geometry of the upper half-space and the comparison
//! `‖DF(x,t)‖ ≈ F^{n+1}(x,t)/t`.

use rayon::prelude::*;
use serde::Serialize;

use crate::differential::{extension_jacobian, spectral_norm};
use crate::error::{Error, Result};
use crate::extension::{extend_point, format_value, ExtensionField};
use crate::geometry::{check_dim, distance, HalfSpacePoint};
use crate::quadrature::SchemeParams;
use crate::sampling::HalfSpacePairSampler;

pub const DEFAULT_LATTICE: usize = 9;
pub const DEFAULT_HALF_WIDTH: f64 = 2.0;
pub const DEFAULT_HEIGHTS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

fn check_height(p: &HalfSpacePoint) -> Result<()> {
    if p.height > 0.0 {
        Ok(())
    } else {
        Err(Error::NonpositiveHeight(p.height))
    }
}

/// Distance for the metric `|dx| / x_{n+1}`.
///
/// Evaluated as `2 asinh(|p - q| / (2 √(t_p t_q)))`, which equals
/// `arccosh(1 + |p - q|² / (2 t_p t_q))` but keeps full precision for nearby
/// points.
pub fn hyperbolic_distance(p: &HalfSpacePoint, q: &HalfSpacePoint) -> Result<f64> {
    check_height(p)?;
    check_height(q)?;
    check_dim(p.dim(), q.dim())?;
    let d = distance(&p.lifted(), &q.lifted());
    Ok(2.0 * (d / (2.0 * (p.height * q.height).sqrt())).asinh())
}

/// Lattice with `per_axis` points per coordinate on `[-half_width, half_width]^n`,
/// crossed with `heights`. Heights vary fastest.
pub fn lattice_grid(dim: usize, per_axis: usize, half_width: f64, heights: &[f64]) -> Result<Vec<HalfSpacePoint>> {
    if per_axis == 0 || dim == 0 {
        return Err(Error::InvalidParameter("grid needs at least one point per axis".into()));
    }
    let axis: Vec<f64> = (0..per_axis)
        .map(|k| if per_axis == 1 { 0.0 } else { -half_width + 2.0 * half_width * k as f64 / (per_axis - 1) as f64 })
        .collect();
    let total = per_axis.pow(dim as u32);
    let mut out = Vec::with_capacity(total * heights.len());
    let mut x = vec![0.0; dim];
    for idx in 0..total {
        let mut rem = idx;
        for c in x.iter_mut().rev() {
            *c = axis[rem % per_axis];
            rem /= per_axis;
        }
        for &t in heights {
            out.push(HalfSpacePoint::from_coords(&x, t)?);
        }
    }
    Ok(out)
}

/// 9 points per axis on `[-2, 2]^n`, heights `{0.25, 0.5, 1, 2}`.
pub fn default_grid(dim: usize) -> Vec<HalfSpacePoint> {
    lattice_grid(dim, DEFAULT_LATTICE, DEFAULT_HALF_WIDTH, &DEFAULT_HEIGHTS).expect("valid default grid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicRow {
    pub x: Vec<f64>,
    pub t: f64,
    pub norm_df: f64,
    pub fvert: f64,
    /// `‖DF(x,t)‖ t / F^{n+1}(x,t)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicReport {
    pub scheme: SchemeParams,
    pub rows: Vec<HyperbolicRow>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

impl HyperbolicReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let n = self.scheme.dim;
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend(["t", "norm_df", "fvert", "ratio"].map(String::from));
        wtr.write_record(header)?;
        for r in &self.rows {
            let mut row: Vec<String> = r.x.iter().map(|v| format_value(*v)).collect();
            row.extend([r.t, r.norm_df, r.fvert, r.ratio].map(format_value));
            wtr.write_record(row)?;
        }
        wtr.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn vanishing(p: &HalfSpacePoint, value: f64, scale: f64) -> Result<()> {
    if value > 1e-14 * scale {
        Ok(())
    } else {
        Err(Error::VanishingVertical { point: p.lifted().into_vec(), value })
    }
}

fn comparison_row(field: &ExtensionField, p: &HalfSpacePoint) -> Result<HyperbolicRow> {
    check_height(p)?;
    let norm_df = spectral_norm(&extension_jacobian(field, p)?);
    let fvert = field.vertical(p)?;
    vanishing(p, fvert, norm_df * p.height)?;
    Ok(HyperbolicRow { x: p.base.to_vec(), t: p.height, norm_df, fvert, ratio: norm_df * p.height / fvert })
}

/// `‖DF(x,t)‖ t / F^{n+1}(x,t)` over a grid.
pub fn vertical_comparison(field: &ExtensionField, grid: &[HalfSpacePoint]) -> Result<HyperbolicReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    for p in grid {
        check_dim(field.base_dim(), p.dim())?;
    }
    let rows = grid.par_iter().map(|p| comparison_row(field, p)).collect::<Result<Vec<_>>>()?;
    let (min, max) = min_max(rows.iter().map(|r| r.ratio));
    Ok(HyperbolicReport { scheme: field.scheme().params(), rows, min, max, spread: max / min })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilipschitzReport {
    pub scheme: SchemeParams,
    /// `d(F(p), F(q)) / d(p, q)` per retained pair.
    pub ratios: Vec<f64>,
    /// Pairs dropped for being at zero distance.
    pub excluded: usize,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

/// Image of `p` as a half-space point, height `F^{n+1}`.
pub fn image_point(field: &ExtensionField, p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
    check_height(p)?;
    let img = extend_point(field, p)?;
    let n = field.base_dim();
    let scale = img.norm().max(p.height);
    vanishing(p, img[n], scale)?;
    HalfSpacePoint::from_lifted(&img)
}

/// Hyperbolic distance ratios `d(F(p), F(q)) / d(p, q)`.
pub fn bilipschitz_sample(field: &ExtensionField, pairs: &[(HalfSpacePoint, HalfSpacePoint)]) -> Result<BilipschitzReport> {
    let evaluated = pairs
        .par_iter()
        .map(|(p, q)| {
            check_dim(field.base_dim(), p.dim())?;
            check_dim(field.base_dim(), q.dim())?;
            let d = hyperbolic_distance(p, q)?;
            if d == 0.0 {
                return Ok(None);
            }
            let (fp, fq) = (image_point(field, p)?, image_point(field, q)?);
            Ok(Some(hyperbolic_distance(&fp, &fq)? / d))
        })
        .collect::<Result<Vec<_>>>()?;
    let excluded = evaluated.iter().filter(|r| r.is_none()).count();
    let ratios: Vec<f64> = evaluated.into_iter().flatten().collect();
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("no pair at positive distance".into()));
    }
    let (min, max) = min_max(ratios.iter().copied());
    Ok(BilipschitzReport { scheme: field.scheme().params(), ratios, excluded, min, max, spread: max / min })
}

/// Draws pairs from `sampler` as half-space points.
pub fn sample_pairs(sampler: &HalfSpacePairSampler, dim: usize) -> Result<Vec<(HalfSpacePoint, HalfSpacePoint)>> {
    sampler
        .sample(dim)
        .into_iter()
        .map(|((x, s), (y, t))| Ok((HalfSpacePoint::from_coords(&x, s)?, HalfSpacePoint::from_coords(&y, t)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SquareMatrix;
    use crate::map::MapSpec;
    use crate::quadrature::QuadratureScheme;
    use std::f64::consts::E;

    fn hp(x: &[f64], t: f64) -> HalfSpacePoint {
        HalfSpacePoint::from_coords(x, t).unwrap()
    }

    fn field(spec: MapSpec) -> ExtensionField {
        let n = spec.dim();
        ExtensionField::new(spec, QuadratureScheme::default_for(n, 0).unwrap()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let o = hp(&[0.0, 0.0], 1.0);
        assert!((hyperbolic_distance(&o, &hp(&[0.0, 0.0], E)).unwrap() - 1.0).abs() < 1e-14);
        assert!((hyperbolic_distance(&o, &hp(&[0.0, 0.0], E * E)).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(hyperbolic_distance(&o, &o).unwrap(), 0.0);
        // agrees with the arccosh form away from the diagonal
        let (p, q) = (hp(&[0.3, -1.0], 0.7), hp(&[2.0, 0.5], 1.9));
        let d2 = distance(&p.lifted(), &q.lifted()).powi(2);
        let want = (1.0 + d2 / (2.0 * 0.7 * 1.9)).acosh();
        assert!((hyperbolic_distance(&p, &q).unwrap() - want).abs() < 1e-12);
        let bad = HalfSpacePoint { base: p.base.clone(), height: 0.0 };
        assert!(matches!(hyperbolic_distance(&bad, &q).unwrap_err(), Error::NonpositiveHeight(_)));
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid(2);
        assert_eq!(g.len(), 81 * 4);
        assert_eq!(g[0].base.to_vec(), vec![-2.0, -2.0]);
        assert_eq!(g[0].height, 0.25);
        assert_eq!(g.last().unwrap().base.to_vec(), vec![2.0, 2.0]);
    }

    #[test]
    fn identity_and_linear_comparisons() {
        let grid = lattice_grid(2, 3, 1.0, &[0.5, 2.0]).unwrap();
        let id = vertical_comparison(&field(MapSpec::identity(2).unwrap()), &grid).unwrap();
        assert!(id.rows.iter().all(|r| (r.ratio - 1.0).abs() < 1e-8));
        let lin = MapSpec::linear(SquareMatrix::diagonal(&[2.0, 3.0]).unwrap()).unwrap();
        let r = vertical_comparison(&field(lin), &grid).unwrap();
        assert!((r.min - 1.0).abs() < 1e-8 && (r.max - 1.0).abs() < 1e-8);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x1,x2,t,norm_df,fvert,ratio\n-1,-1,0.5,"));
    }

    #[test]
    fn non_monotone_map_has_vanishing_vertical() {
        // F^{n+1} of x ↦ -x is -n t
        let neg = MapSpec::linear(SquareMatrix::diagonal(&[-1.0, -1.0]).unwrap()).unwrap();
        let e = vertical_comparison(&field(neg), &[hp(&[0.0, 0.0], 1.0)]).unwrap_err();
        assert!(matches!(e, Error::VanishingVertical { .. }));
    }

    #[test]
    fn identity_is_isometric_on_vertical_pairs() {
        let f = field(MapSpec::identity(2).unwrap());
        let r = bilipschitz_sample(&f, &[(hp(&[0.0, 0.0], 1.0), hp(&[0.0, 0.0], E))]).unwrap();
        assert!((r.min - 1.0).abs() < 1e-10);
        let r = bilipschitz_sample(&f, &[(hp(&[1.0, 0.0], 1.0), hp(&[1.0, 0.0], 1.0)), (hp(&[0.0, 0.0], 1.0), hp(&[0.0, 0.0], 2.0))])
            .unwrap();
        assert_eq!(r.excluded, 1);
        assert_eq!(r.ratios.len(), 1);
    }
}
