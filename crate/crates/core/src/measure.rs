//! Doubling measures `μ = ρ dx` with `ρ ≡ 1` or `ρ = ‖Df‖`.

use rayon::prelude::*;
use serde::Serialize;

use crate::differential::spectral_norm;
use crate::error::{Error, Result};
use crate::extension::format_value;
use crate::geometry::{check_dim, distance, dot, SquareMatrix};
use crate::map::MapSpec;
use crate::quadrature::ball::{unit_ball_volume, BallRule};
use crate::quadrature::sequence::Kronecker;
use crate::quadrature::QuadratureScheme;

/// Points on the boundary sphere used by [`box_ratio`] (half of them are the
/// antipodes of the other half).
pub const DIAMETER_BOUNDARY_POINTS: usize = 512;
/// Interior points used by [`box_ratio`].
pub const DIAMETER_INTERIOR_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Lebesgue { dim: usize },
    JacobianNorm { spec: MapSpec },
}

impl Density {
    pub fn lebesgue(dim: usize) -> Self {
        Density::Lebesgue { dim }
    }

    pub fn jacobian_norm(spec: MapSpec) -> Self {
        Density::JacobianNorm { spec }
    }

    pub fn dim(&self) -> usize {
        match self {
            Density::Lebesgue { dim } => *dim,
            Density::JacobianNorm { spec } => spec.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            Density::Lebesgue { .. } => Ok(1.0),
            Density::JacobianNorm { spec } => {
                Ok(spectral_norm(&SquareMatrix::from_matrix_unchecked(spec.jacobian_at(x)?)))
            }
        }
    }

    /// `μ(B(center, radius))`.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> Result<f64> {
        check_dim(self.dim(), center.len())?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        BallRule::shared(self.dim()).try_integrate(center, radius, |z| self.eval(z))
    }
}

fn check_mass(mass: f64, center: &[f64], radius: f64, dim: usize) -> Result<()> {
    // average density below 1e-12 counts as empty
    if mass.is_finite() && mass > 1e-12 * unit_ball_volume(dim) * radius.powi(dim as i32) {
        Ok(())
    } else {
        Err(Error::ZeroMassBall { center: center.to_vec(), radius })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallRatio {
    pub center: Vec<f64>,
    pub radius: f64,
    pub mass: f64,
    pub mass2x: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    /// Largest sampled `μ(2B)/μ(B)`.
    pub constant_hat: f64,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub balls: Vec<BallRatio>,
}

impl DoublingReport {
    pub fn columns(dim: usize) -> Vec<String> {
        let mut cols: Vec<String> = match dim {
            2 => vec!["cx".into(), "cy".into()],
            3 => vec!["cx".into(), "cy".into(), "cz".into()],
            _ => (1..=dim).map(|i| format!("c{i}")).collect(),
        };
        cols.extend(["r", "mass", "mass2x", "ratio"].map(String::from));
        cols
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let dim = self.centers.first().map_or(0, Vec::len);
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(Self::columns(dim))?;
        for b in &self.balls {
            let mut row: Vec<String> = b.center.iter().map(|v| format_value(*v)).collect();
            row.extend([b.radius, b.mass, b.mass2x, b.ratio].map(format_value));
            wtr.write_record(row)?;
        }
        wtr.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }
}

/// `μ(2B)/μ(B)` for every ball `B(c, r)` with `c` in `centers` and `r` in
/// `radii`, center-major.
pub fn doubling_report(density: &Density, centers: &[Vec<f64>], radii: &[f64]) -> Result<DoublingReport> {
    let n = density.dim();
    for c in centers {
        check_dim(n, c.len())?;
    }
    let jobs: Vec<(&Vec<f64>, f64)> = centers.iter().flat_map(|c| radii.iter().map(move |r| (c, *r))).collect();
    let balls = jobs
        .par_iter()
        .map(|(c, r)| {
            let mass = density.ball_mass(c, *r)?;
            check_mass(mass, c, *r, n)?;
            let mass2x = density.ball_mass(c, 2.0 * r)?;
            Ok(BallRatio { center: c.to_vec(), radius: *r, mass, mass2x, ratio: mass2x / mass })
        })
        .collect::<Result<Vec<_>>>()?;
    let constant_hat = balls.iter().map(|b| b.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(DoublingReport { constant_hat, centers: centers.to_vec(), radii: radii.to_vec(), balls })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRatio {
    pub integral: f64,
    pub unit_ball_mass: f64,
    pub ratio: f64,
}

/// `∫_Ω |y|^p φ(y) dμ(y)` against `μ(B(0,1))`, where `Ω` is the whole space or
/// the half-space `⟨y, ξ⟩ ≥ 0`. Nodes on the bounding hyperplane count half.
pub fn gaussian_moment_ratio(
    density: &Density,
    p: f64,
    halfspace_normal: Option<&[f64]>,
    scheme: &QuadratureScheme,
) -> Result<MomentRatio> {
    let n = density.dim();
    check_dim(n, scheme.dim())?;
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("moment exponent must be >= 0, got {p}")));
    }
    if let Some(xi) = halfspace_normal {
        check_dim(n, xi.len())?;
        if xi.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidParameter("half-space normal must be nonzero".into()));
        }
    }
    let mut failure = None;
    let integral = scheme.integrate_into(1, |y, out| {
        let indicator = match halfspace_normal {
            None => 1.0,
            Some(xi) => {
                let s = dot(y, xi);
                if s > 0.0 {
                    1.0
                } else if s == 0.0 {
                    0.5
                } else {
                    0.0
                }
            }
        };
        out[0] = 0.0;
        if indicator == 0.0 || failure.is_some() {
            return;
        }
        match density.eval(y) {
            Ok(rho) => out[0] = indicator * crate::geometry::norm(y).powf(p) * rho,
            Err(e) => failure = Some(e),
        }
    })?[0];
    if let Some(e) = failure {
        return Err(e);
    }
    let origin = vec![0.0; n];
    let unit_ball_mass = density.ball_mass(&origin, 1.0)?;
    check_mass(unit_ball_mass, &origin, 1.0, n)?;
    Ok(MomentRatio { integral, unit_ball_mass, ratio: integral / unit_ball_mass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxRatio {
    /// `(1/|B|) ∫_B ‖Df‖`.
    pub average_norm: f64,
    /// `diam f(B) / diam B`.
    pub diameter_ratio: f64,
    pub ratio: f64,
}

/// Sample of `B(center, radius)`: antipodal boundary pairs plus low-discrepancy
/// interior points.
pub fn ball_sample(center: &[f64], radius: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let half = DIAMETER_BOUNDARY_POINTS / 2;
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(DIAMETER_BOUNDARY_POINTS);
    if n == 1 {
        dirs.push(vec![1.0]);
    } else if n == 2 {
        for k in 0..half {
            let (s, c) = (std::f64::consts::PI * k as f64 / half as f64).sin_cos();
            dirs.push(vec![c, s]);
        }
    } else {
        let seq = Kronecker::new(n, 1);
        let mut g = vec![0.0; n];
        for k in 0..half as u64 {
            seq.gaussian_point(k, &mut g);
            let len = crate::geometry::norm(&g);
            dirs.push(g.iter().map(|v| v / len).collect());
        }
        for j in 0..n {
            dirs.push((0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect());
        }
    }
    let at = |u: &[f64], s: f64| -> Vec<f64> { center.iter().zip(u).map(|(c, v)| c + s * radius * v).collect() };
    let mut pts: Vec<Vec<f64>> = dirs.iter().flat_map(|u| [at(u, 1.0), at(u, -1.0)]).collect();
    let seq = Kronecker::new(n, 2);
    let mut u = vec![0.0; n];
    let mut i = 0u64;
    let mut added = 0;
    while added < DIAMETER_INTERIOR_POINTS {
        seq.unit_point(i, &mut u);
        i += 1;
        let y: Vec<f64> = u.iter().map(|v| 2.0 * v - 1.0).collect();
        if y.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            pts.push(at(&y, 1.0));
            added += 1;
        }
    }
    pts
}

fn diameter(points: &[Vec<f64>]) -> f64 {
    (0..points.len())
        .into_par_iter()
        .map(|i| points[i + 1..].iter().map(|q| distance(&points[i], q)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

pub fn box_ratio(spec: &MapSpec, center: &[f64], radius: f64) -> Result<BoxRatio> {
    let n = spec.dim();
    let density = Density::jacobian_norm(spec.clone());
    let mass = density.ball_mass(center, radius)?;
    let average_norm = mass / (unit_ball_volume(n) * radius.powi(n as i32));
    let images: Vec<Vec<f64>> = ball_sample(center, radius).iter().map(|x| spec.eval(x)).collect();
    let image_diam = diameter(&images);
    if image_diam.is_nan() || image_diam <= 1e-12 * radius {
        return Err(Error::DegenerateImage(image_diam));
    }
    let diameter_ratio = image_diam / (2.0 * radius);
    Ok(BoxRatio { average_norm, diameter_ratio, ratio: average_norm / diameter_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Method;
    use std::f64::consts::PI;

    #[test]
    fn lebesgue_doubles_by_two_to_the_n() {
        let centers = vec![vec![0.0, 0.0], vec![1.5, -2.0]];
        let r = doubling_report(&Density::lebesgue(2), &centers, &[0.1, 1.0, 30.0]).unwrap();
        assert!(r.balls.iter().all(|b| (b.ratio - 4.0).abs() < 1e-6));
        assert!((r.constant_hat - 4.0).abs() < 1e-6);
        let r = doubling_report(&Density::lebesgue(3), &[vec![0.0, 1.0, 2.0]], &[0.5]).unwrap();
        assert!((r.constant_hat - 8.0).abs() < 1e-6);
    }

    #[test]
    fn power_radial_density_at_origin() {
        let d = Density::jacobian_norm(MapSpec::power_radial(2, 1.0).unwrap());
        let r = doubling_report(&d, &[vec![0.0, 0.0]], &[0.3, 1.0]).unwrap();
        assert!(r.balls.iter().all(|b| (b.ratio - 8.0).abs() < 1e-9), "{r:?}");
    }

    #[test]
    fn zero_mass_ball() {
        let zero = MapSpec::linear(SquareMatrix::zeros(2)).unwrap();
        let e = doubling_report(&Density::jacobian_norm(zero), &[vec![0.0, 0.0]], &[1.0]).unwrap_err();
        assert!(matches!(e, Error::ZeroMassBall { .. }));
    }

    #[test]
    fn doubling_csv_columns() {
        let r = doubling_report(&Density::lebesgue(2), &[vec![0.0, 0.0]], &[1.0]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("cx,cy,r,mass,mass2x,ratio\n0,0,1,"));
    }

    #[test]
    fn gaussian_moments_of_lebesgue() {
        let scheme = QuadratureScheme::from_params(crate::quadrature::SchemeParams {
            dim: 2,
            method: Method::TensorHermite,
            resolution: 21,
            seed: 0,
        })
        .unwrap();
        let leb = Density::lebesgue(2);
        let full = gaussian_moment_ratio(&leb, 0.0, None, &scheme).unwrap();
        assert!((full.integral - 1.0).abs() < 1e-12 && (full.ratio - 1.0 / PI).abs() < 1e-12);
        let half = gaussian_moment_ratio(&leb, 0.0, Some(&[0.0, 1.0]), &scheme).unwrap();
        assert!((half.integral - 0.5).abs() < 1e-12 && (half.ratio - 0.5 / PI).abs() < 1e-12);
        let second = gaussian_moment_ratio(&leb, 2.0, None, &scheme).unwrap();
        assert!((second.integral - 2.0).abs() < 1e-12 && (second.ratio - 2.0 / PI).abs() < 1e-12);
        assert!(gaussian_moment_ratio(&leb, -1.0, None, &scheme).is_err());
    }

    #[test]
    fn box_ratio_examples() {
        let id = box_ratio(&MapSpec::identity(2).unwrap(), &[0.3, -1.0], 2.0).unwrap();
        assert!((id.ratio - 1.0).abs() < 1e-2);
        let lin = MapSpec::linear(SquareMatrix::diagonal(&[2.0, 2.0]).unwrap()).unwrap();
        assert!((box_ratio(&lin, &[1.0, 1.0], 0.5).unwrap().ratio - 1.0).abs() < 1e-2);
        let pr = box_ratio(&MapSpec::power_radial(2, 1.0).unwrap(), &[0.0, 0.0], 1.0).unwrap();
        assert!((pr.average_norm - 4.0 / 3.0).abs() < 1e-9);
        assert!((pr.ratio - 4.0 / 3.0).abs() < 1e-2);
        assert!(ball_sample(&[0.0, 0.0, 0.0], 1.0).len() >= 1000);

        let zero = MapSpec::linear(SquareMatrix::zeros(2)).unwrap();
        assert!(matches!(box_ratio(&zero, &[0.0, 0.0], 1.0).unwrap_err(), Error::DegenerateImage(_)));
    }
}
