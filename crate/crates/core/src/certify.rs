//! Empirical certificates for delta-monotonicity, quasisymmetry and distortion.
//!
//! A map `f` is δ-monotone when `<f(x) - f(y), x - y> ≥ δ |f(x) - f(y)| |x - y|`
//! for all pairs. At matrix level the same quantity is
//! `min_v vᵀAv / (|Av| |v|)`, and the weaker `min_v vᵀAv / (‖A‖ |v|²)` is the
//! γ-constant. A δ-monotone matrix also satisfies `|Av| ≥ c(δ) ‖A‖ |v|` with
//! `c(δ) = (δ⁻¹ + 1 - √((δ⁻¹ + 1)² - 1))²`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::differential::spectral_norm;
use crate::error::{Error, Result};
use crate::geometry::{distance, dot, norm, SquareMatrix};
use crate::map::{MapSpec, PointMap};
use crate::sampling::{self, PairSampler, TripleSampler};

/// Samples used by the angular sweep of [`matrix_delta`] in the plane.
pub const ANGULAR_SWEEP: usize = 4096;
/// Random starts scored by [`matrix_delta`] in dimension three and up.
pub const RANDOM_STARTS: usize = 512;
/// Best starts that get projected-gradient refinement.
pub const REFINED_STARTS: usize = 8;
const MATRIX_DELTA_SEED: u64 = 0x5eed_de17a;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCertificate {
    pub delta_hat: f64,
    pub witness: Witness,
    pub samples: usize,
    /// Pairs skipped because their images coincided.
    pub collapsed: usize,
    pub seed: u64,
}

/// `<F(a) - F(b), a - b> / (|F(a) - F(b)| |a - b|)`, or `None` when either
/// difference vanishes.
pub fn two_point_ratio(map: &dyn PointMap, a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    let (fa, fb) = (map.apply(a)?, map.apply(b)?);
    Ok(ratio_from_images(a, b, &fa, &fb))
}

fn ratio_from_images(a: &[f64], b: &[f64], fa: &[f64], fb: &[f64]) -> Option<f64> {
    let dx: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
    let df: Vec<f64> = fa.iter().zip(fb).map(|(u, v)| u - v).collect();
    let (nx, nf) = (norm(&dx), norm(&df));
    let scale = norm(fa).max(norm(fb));
    if nx == 0.0 || nf == 0.0 || nf <= f64::EPSILON * scale {
        return None;
    }
    Some((dot(&df, &dx) / (nf * nx)).clamp(-1.0, 1.0))
}

/// Minimum two-point ratio over an explicit list of pairs.
pub fn certify_pairs(map: &dyn PointMap, pairs: &[(Vec<f64>, Vec<f64>)], seed: u64) -> Result<DeltaCertificate> {
    let ratios: Vec<Result<Option<f64>>> =
        pairs.par_iter().map(|(a, b)| two_point_ratio(map, a, b)).collect();
    let mut best: Option<(f64, usize)> = None;
    let mut collapsed = 0;
    for (i, r) in ratios.into_iter().enumerate() {
        match r? {
            None => collapsed += 1,
            Some(v) => {
                if best.is_none_or(|(m, _)| v < m) {
                    best = Some((v, i));
                }
            }
        }
    }
    let (delta_hat, i) = best.ok_or(Error::DegenerateMap)?;
    Ok(DeltaCertificate {
        delta_hat,
        witness: Witness { a: pairs[i].0.clone(), b: pairs[i].1.clone() },
        samples: pairs.len(),
        collapsed,
        seed,
    })
}

/// Empirical δ of `map` over pairs drawn by `sampler`.
pub fn two_point_delta(map: &dyn PointMap, sampler: &PairSampler) -> Result<DeltaCertificate> {
    let pairs = sampler.sample(map.dim());
    certify_pairs(map, &pairs, sampler.seed)
}

/// Pairs that expose the trivial lift `(x, t) ↦ (|x|x, t)`.
///
/// At base radius `R` the pair is `a = (R, 0, ..., 0)` and
/// `b = (R, ε, 0, ..., √R ε)` with `ε = 1/R`; the two-point ratio is about
/// `2/√R`. Radii run log-uniformly over `radii_log10`, and the height gap is
/// also tried at half and double its nominal value.
pub fn trivial_extension_witnesses(base_dim: usize, radii_log10: (f64, f64), count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    assert!(base_dim >= 2 && count >= 1);
    let mut out = Vec::with_capacity(3 * count);
    for k in 0..count {
        let frac = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
        let r = 10f64.powf(radii_log10.0 + frac * (radii_log10.1 - radii_log10.0));
        out.extend([0.5, 1.0, 2.0].map(|scale| witness_pair(base_dim, r, scale)));
    }
    out
}

fn witness_pair(base_dim: usize, r: f64, height_scale: f64) -> (Vec<f64>, Vec<f64>) {
    let eps = 1.0 / r;
    let mut a = vec![0.0; base_dim + 1];
    a[0] = r;
    let mut b = a.clone();
    b[1] = eps;
    b[base_dim] = height_scale * r.sqrt() * eps;
    (a, b)
}

/// The single witness pair at radius `r`.
pub fn trivial_extension_witness(base_dim: usize, r: f64) -> (Vec<f64>, Vec<f64>) {
    witness_pair(base_dim, r, 1.0)
}

fn matrix_ratio(a: &DMatrix<f64>, v: &DVector<f64>) -> Option<f64> {
    let av = a * v;
    let nav = av.norm();
    if nav <= 1e-300 {
        return None;
    }
    Some(v.dot(&av) / (nav * v.norm()))
}

fn check_nonzero(a: &SquareMatrix) -> Result<()> {
    if a.iter().all(|v| *v == 0.0) {
        Err(Error::ZeroMatrix)
    } else {
        Ok(())
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if hi - lo < 1e-14 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Projected gradient descent of `vᵀAv / |Av|` on the unit sphere.
fn refine_on_sphere(a: &DMatrix<f64>, mut v: DVector<f64>) -> f64 {
    let sym = a + a.transpose();
    let gram = a.tr_mul(a);
    let objective = |v: &DVector<f64>| matrix_ratio(a, v).unwrap_or(f64::INFINITY);
    let mut val = objective(&v);
    let mut step = 0.5;
    for _ in 0..200 {
        let av = a * &v;
        let nav = av.norm();
        if nav <= 1e-300 {
            break;
        }
        let q = v.dot(&av);
        let grad = &sym * &v / nav - (q / nav.powi(3)) * (&gram * &v);
        let tangent = &grad - grad.dot(&v) * &v;
        if tangent.norm() < 1e-13 {
            break;
        }
        let mut improved = false;
        while step > 1e-16 {
            let mut cand = &v - step * &tangent;
            cand /= cand.norm();
            let cv = objective(&cand);
            if cv < val {
                v = cand;
                val = cv;
                improved = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    val
}

/// `min_{|v|=1, Av≠0} vᵀAv / |Av|`.
pub fn matrix_delta(a: &SquareMatrix) -> Result<f64> {
    check_nonzero(a)?;
    let m = a.as_matrix();
    let n = a.dim();
    match n {
        1 => Ok(m[(0, 0)].signum()),
        2 => {
            let at = |theta: f64| {
                let v = DVector::from_column_slice(&[theta.cos(), theta.sin()]);
                matrix_ratio(m, &v).unwrap_or(f64::INFINITY)
            };
            let dtheta = std::f64::consts::PI / ANGULAR_SWEEP as f64;
            let (best_i, best) = (0..ANGULAR_SWEEP)
                .map(|i| (i, at(i as f64 * dtheta)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            let center = best_i as f64 * dtheta;
            let (_, refined) = golden_section(at, center - dtheta, center + dtheta);
            Ok(best.min(refined))
        }
        _ => {
            let mut rng = sampling::rng(MATRIX_DELTA_SEED);
            let mut starts: Vec<(f64, DVector<f64>)> = (0..RANDOM_STARTS)
                .map(|_| {
                    let v = DVector::from_vec(sampling::unit_vector(&mut rng, n));
                    (matrix_ratio(m, &v).unwrap_or(f64::INFINITY), v)
                })
                .collect();
            // basis vectors too, so diagonal extremes are hit exactly
            for j in 0..n {
                let v = DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
                starts.push((matrix_ratio(m, &v).unwrap_or(f64::INFINITY), v));
            }
            starts.sort_by(|x, y| x.0.total_cmp(&y.0));
            let best = starts
                .into_iter()
                .take(REFINED_STARTS)
                .map(|(v0, v)| v0.min(refine_on_sphere(m, v)))
                .fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                Ok(best)
            } else {
                Err(Error::ZeroMatrix)
            }
        }
    }
}

/// `min_{|v|=1} vᵀAv / ‖A‖`, i.e. the least eigenvalue of the symmetric part
/// over the largest singular value.
pub fn matrix_gamma(a: &SquareMatrix) -> Result<f64> {
    check_nonzero(a)?;
    let m = a.as_matrix();
    let sym = (m + m.transpose()) * 0.5;
    let lmin = SymmetricEigen::new(sym).eigenvalues.min();
    Ok(lmin / spectral_norm(a))
}

/// `c(δ) = λ²` with `λ = δ⁻¹ + 1 - √((δ⁻¹ + 1)² - 1)`.
pub fn claim_constant(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::OutOfRange(format!("delta must lie in (0, 1], got {delta}")));
    }
    let k = 1.0 / delta + 1.0;
    // k - √(k² - 1) without cancellation
    let lambda = 1.0 / (k + (k * k - 1.0).sqrt());
    Ok(lambda * lambda)
}

/// `‖A‖^n / det A`.
pub fn qc_distortion(a: &SquareMatrix, n: usize) -> Result<f64> {
    let det = a.determinant();
    if det.is_nan() || det <= 0.0 {
        return Err(Error::NonpositiveDeterminant(det));
    }
    Ok(spectral_norm(a).powi(n as i32) / det)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaBucket {
    pub s_lo: f64,
    pub s_hi: f64,
    pub count: usize,
    /// Largest `q` seen in this bucket (0 when empty).
    pub q_max: f64,
    /// Running maximum of `q_max` over this and all lower buckets.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaProfile {
    /// `(s, q)` per retained triple, in sampling order.
    pub samples: Vec<(f64, f64)>,
    pub buckets: Vec<EtaBucket>,
    pub collapsed: usize,
    pub seed: u64,
}

impl EtaProfile {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["s", "q"])?;
        for (s, q) in &self.samples {
            wtr.write_record([crate::extension::format_value(*s), crate::extension::format_value(*q)])?;
        }
        wtr.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }

    /// Envelope value of the bucket containing `s`, if any.
    pub fn eta(&self, s: f64) -> Option<f64> {
        self.buckets.iter().find(|b| s >= b.s_lo && s <= b.s_hi).map(|b| b.envelope)
    }
}

pub const ETA_BUCKETS: usize = 40;

/// Samples `(s, q)` with `s = |x-z|/|y-z|`, `q = |f(x)-f(z)|/|f(y)-f(z)|` and
/// builds the bucketed, nondecreasing upper envelope.
pub fn quasisymmetry_profile(map: &dyn PointMap, sampler: &TripleSampler) -> Result<EtaProfile> {
    let triples = sampler.sample(map.dim());
    let evaluated: Vec<Result<Option<(f64, f64)>>> = triples
        .par_iter()
        .map(|[x, y, z]| {
            let (fx, fy, fz) = (map.apply(x)?, map.apply(y)?, map.apply(z)?);
            let (dyz, dfyz) = (distance(y, z), distance(&fy, &fz));
            if dyz == 0.0 || dfyz == 0.0 {
                return Ok(None);
            }
            Ok(Some((distance(x, z) / dyz, distance(&fx, &fz) / dfyz)))
        })
        .collect();
    let mut samples = Vec::with_capacity(triples.len());
    let mut collapsed = 0;
    for r in evaluated {
        match r? {
            Some(sq) => samples.push(sq),
            None => collapsed += 1,
        }
    }
    if collapsed * 100 > triples.len() {
        return Err(Error::DegenerateTriples { collapsed, total: triples.len() });
    }
    let (lo, hi) = sampler.log10_ratio;
    let width = (hi - lo) / ETA_BUCKETS as f64;
    let mut buckets: Vec<EtaBucket> = (0..ETA_BUCKETS)
        .map(|k| EtaBucket {
            s_lo: 10f64.powf(lo + k as f64 * width),
            s_hi: 10f64.powf(lo + (k + 1) as f64 * width),
            count: 0,
            q_max: 0.0,
            envelope: 0.0,
        })
        .collect();
    for &(s, q) in &samples {
        let k = (((s.log10() - lo) / width).floor().max(0.0) as usize).min(ETA_BUCKETS - 1);
        buckets[k].count += 1;
        buckets[k].q_max = buckets[k].q_max.max(q);
    }
    let mut running = 0.0_f64;
    for b in buckets.iter_mut() {
        running = running.max(b.q_max);
        b.envelope = running;
    }
    Ok(EtaProfile { samples, buckets, collapsed, seed: sampler.seed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    pub theta1: f64,
    pub theta2: f64,
    pub delta_first: f64,
    pub delta_second: f64,
    pub delta_composed: f64,
    /// Two-point certificate of the composed rotation over sampled pairs.
    pub sampled_composed: DeltaCertificate,
    pub non_monotone: bool,
}

/// Rotations by `θ₁` and `θ₂` are each δ-monotone with `δ = cos θ`, but their
/// composition is not monotone once `|θ₁ + θ₂| ≥ π/2`.
pub fn composition_monotonicity_demo(theta1: f64, theta2: f64) -> Result<CompositionReport> {
    for th in [theta1, theta2] {
        if th.is_nan() || th.abs() >= FRAC_PI_2 {
            return Err(Error::OutOfRange(format!("rotation angle {th} must satisfy |θ| < π/2")));
        }
    }
    let delta_first = matrix_delta(&SquareMatrix::rotation(theta1))?;
    let delta_second = matrix_delta(&SquareMatrix::rotation(theta2))?;
    let delta_composed = matrix_delta(&SquareMatrix::rotation(theta1 + theta2))?;
    let composed = MapSpec::composition(vec![
        MapSpec::planar_rotation(2, theta1)?,
        MapSpec::planar_rotation(2, theta2)?,
    ])?;
    let sampler = PairSampler { pairs: 1000, ..Default::default() };
    let sampled_composed = two_point_delta(&composed, &sampler)?;
    Ok(CompositionReport {
        theta1,
        theta2,
        delta_first,
        delta_second,
        delta_composed,
        sampled_composed,
        non_monotone: (theta1 + theta2).abs() >= FRAC_PI_2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimDimReport {
    pub dim: usize,
    pub tested: usize,
    pub candidates: usize,
    /// Matrices with `σ_min < c(δ_A) σ_max`.
    pub violations: usize,
    /// Matrices breaking `γ_A ≥ δ_A c(δ_A)` or `δ_A ≥ γ_A`.
    pub chain_violations: usize,
    /// Smallest observed `σ_min / (c(δ_A) σ_max)`.
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub seed: u64,
    pub min_delta: f64,
    pub dims: Vec<ClaimDimReport>,
}

impl ClaimReport {
    pub fn total_violations(&self) -> usize {
        self.dims.iter().map(|d| d.violations + d.chain_violations).sum()
    }
}

/// Random matrix candidates `G + sI` with standard normal `G` and `s ~ U(0, 3)`.
fn candidate_matrix<R: Rng>(rng: &mut R, n: usize) -> SquareMatrix {
    let g = sampling::gaussian_vector(rng, n * n);
    let s: f64 = rng.random_range(0.0..3.0);
    let mut m = DMatrix::from_row_slice(n, n, &g);
    for i in 0..n {
        m[(i, i)] += s;
    }
    SquareMatrix::new(m).expect("finite")
}

/// Brute-force check of `σ_min(A) ≥ c(δ_A) σ_max(A)` and of the δ/γ chain on
/// `count` random matrices per dimension with `δ_A ≥ min_delta`.
pub fn claim_check(count: usize, dims: &[usize], seed: u64, min_delta: f64) -> Result<ClaimReport> {
    const BATCH: usize = 2048;
    const CHAIN_TOL: f64 = 1e-9;
    let mut reports = Vec::new();
    for &n in dims {
        if n < 1 {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        let mut rng = sampling::rng(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut report =
            ClaimDimReport { dim: n, tested: 0, candidates: 0, violations: 0, chain_violations: 0, min_slack: f64::INFINITY };
        while report.tested < count {
            let batch: Vec<SquareMatrix> = (0..BATCH).map(|_| candidate_matrix(&mut rng, n)).collect();
            let deltas: Vec<Result<f64>> = batch.par_iter().map(matrix_delta).collect();
            for (a, d) in batch.iter().zip(deltas) {
                if report.tested == count {
                    break;
                }
                report.candidates += 1;
                let delta = d?;
                if delta < min_delta {
                    continue;
                }
                report.tested += 1;
                let sv = a.as_matrix().clone().svd(false, false).singular_values;
                let (smin, smax) = (sv.min(), sv.max());
                let c = claim_constant(delta.min(1.0))?;
                let slack = smin / (c * smax);
                report.min_slack = report.min_slack.min(slack);
                if smin < c * smax {
                    report.violations += 1;
                }
                let gamma = matrix_gamma(a)?;
                if gamma < delta * c - CHAIN_TOL || delta < gamma - CHAIN_TOL {
                    report.chain_violations += 1;
                }
            }
        }
        reports.push(report);
    }
    Ok(ClaimReport { seed, min_delta, dims: reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::TrivialExtension;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    #[test]
    fn rotation_and_identity_certificates() {
        let rot = MapSpec::planar_rotation(2, FRAC_PI_4).unwrap();
        let c = two_point_delta(&rot, &PairSampler { pairs: 2000, ..Default::default() }).unwrap();
        assert!((c.delta_hat - FRAC_PI_4.cos()).abs() < 1e-3);
        let w = two_point_ratio(&rot, &c.witness.a, &c.witness.b).unwrap().unwrap();
        assert_eq!(w, c.delta_hat);

        let id = MapSpec::identity(3).unwrap();
        let c = two_point_delta(&id, &PairSampler { pairs: 2000, ..Default::default() }).unwrap();
        assert!((c.delta_hat - 1.0).abs() < 1e-12);
        assert!(c.delta_hat <= 1.0);
    }

    #[test]
    fn collapsed_maps_are_degenerate() {
        let zero = crate::map::FnMap { dim: 2, f: |_: &[f64]| Ok(vec![1.0, 1.0]) };
        let e = two_point_delta(&zero, &PairSampler { pairs: 10, ..Default::default() }).unwrap_err();
        assert_eq!(e, Error::DegenerateMap);
    }

    #[test]
    fn trivial_extension_of_power_map_fails() {
        let lift = TrivialExtension(MapSpec::power_radial(2, 1.0).unwrap());
        let (a, b) = trivial_extension_witness(2, 400.0);
        let r = two_point_ratio(&lift, &a, &b).unwrap().unwrap();
        assert!(r <= 0.1 && (r - 0.1).abs() < 2e-3, "{r}");
        let cert = certify_pairs(&lift, &trivial_extension_witnesses(2, (0.0, 4.0), 41), 0).unwrap();
        assert!(cert.delta_hat < 0.03, "{}", cert.delta_hat);
    }

    #[test]
    fn matrix_delta_examples() {
        for theta in [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
            let d = matrix_delta(&SquareMatrix::rotation(theta)).unwrap();
            assert!((d - theta.cos()).abs() < 1e-6, "{theta}: {d}");
        }
        assert!((matrix_delta(&SquareMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-12);
        assert!(matrix_delta(&SquareMatrix::diagonal(&[1.0, -1.0]).unwrap()).unwrap() <= -1.0 + 1e-12);
        assert!(matrix_delta(&SquareMatrix::diagonal(&[1.0, 2.0, -1.0]).unwrap()).unwrap() <= -1.0 + 1e-9);
        assert_eq!(matrix_delta(&SquareMatrix::zeros(2)).unwrap_err(), Error::ZeroMatrix);
    }

    #[test]
    fn matrix_delta_of_spd_matrix_has_closed_form() {
        // for SPD with extreme eigenvalues a ≤ b, min vᵀAv/|Av| = 2√(ab)/(a+b)
        let want = 2.0 * 3f64.sqrt() / 4.0;
        let d2 = matrix_delta(&SquareMatrix::diagonal(&[1.0, 3.0]).unwrap()).unwrap();
        assert!((d2 - want).abs() < 1e-9, "{d2}");
        let d3 = matrix_delta(&SquareMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap()).unwrap();
        assert!((d3 - want).abs() < 1e-9, "{d3}");
    }

    #[test]
    fn matrix_gamma_examples() {
        assert!((matrix_gamma(&SquareMatrix::diagonal(&[1.0, 3.0]).unwrap()).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((matrix_gamma(&SquareMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-12);
        let th = 0.6;
        assert!((matrix_gamma(&SquareMatrix::rotation(th)).unwrap() - th.cos()).abs() < 1e-12);
        assert_eq!(matrix_gamma(&SquareMatrix::zeros(3)).unwrap_err(), Error::ZeroMatrix);
    }

    #[test]
    fn claim_constant_values() {
        let want = (2.0 - 3f64.sqrt()).powi(2);
        assert!((claim_constant(1.0).unwrap() - want).abs() < 1e-15);
        assert!((claim_constant(1.0).unwrap() - 0.0717968).abs() < 1e-7);
        let grid: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
        let vals: Vec<f64> = grid.iter().map(|d| claim_constant(*d).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        assert!(claim_constant(1e-8).unwrap() < 1e-15);
        assert!(claim_constant(0.0).is_err() && claim_constant(1.5).is_err() && claim_constant(f64::NAN).is_err());
        // identity: σ_min / σ_max = 1 ≥ c(1)
        assert!(1.0 >= claim_constant(1.0).unwrap());
    }

    #[test]
    fn distortion_examples() {
        assert!((qc_distortion(&SquareMatrix::identity(2), 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((qc_distortion(&SquareMatrix::diagonal(&[2.0, 1.0]).unwrap(), 2).unwrap() - 2.0).abs() < 1e-9);
        assert!(matches!(
            qc_distortion(&SquareMatrix::diagonal(&[1.0, -1.0]).unwrap(), 2).unwrap_err(),
            Error::NonpositiveDeterminant(_)
        ));
    }

    #[test]
    fn eta_profiles() {
        let sampler = TripleSampler { triples: 2000, ..Default::default() };
        let id = quasisymmetry_profile(&MapSpec::identity(2).unwrap(), &sampler).unwrap();
        assert!(id.samples.iter().all(|(s, q)| s == q));
        let rot = quasisymmetry_profile(&MapSpec::planar_rotation(2, 1.1).unwrap(), &sampler).unwrap();
        assert!(rot.samples.iter().all(|(s, q)| (s - q).abs() <= 1e-12 * s.max(1.0)));

        let pr = quasisymmetry_profile(&MapSpec::power_radial(2, 1.0).unwrap(), &sampler).unwrap();
        assert!(pr.buckets.windows(2).all(|w| w[0].envelope <= w[1].envelope));
        assert!(pr.buckets.iter().all(|b| b.envelope.is_finite()));
        assert!(pr.eta(1.0).unwrap() > 0.0);
        assert!(pr.samples.iter().all(|(s, q)| *s > 0.0 && *q > 0.0));

        let mut buf = Vec::new();
        id.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("s,q\n"));
    }

    #[test]
    fn composition_demo() {
        let r = composition_monotonicity_demo(PI / 3.0, PI / 3.0).unwrap();
        assert!((r.delta_first - 0.5).abs() < 1e-6 && (r.delta_second - 0.5).abs() < 1e-6);
        assert!((r.delta_composed + 0.5).abs() < 1e-6);
        assert!(r.non_monotone);
        assert!(r.sampled_composed.delta_hat <= -0.5 + 1e-6);

        let r = composition_monotonicity_demo(FRAC_PI_8, FRAC_PI_8).unwrap();
        assert!((r.delta_composed - FRAC_PI_4.cos()).abs() < 1e-6 && !r.non_monotone);

        let r = composition_monotonicity_demo(0.0, 0.0).unwrap();
        assert!([r.delta_first, r.delta_second, r.delta_composed].iter().all(|d| (d - 1.0).abs() < 1e-12));

        assert!(composition_monotonicity_demo(2.0, 0.0).is_err());
    }

    #[test]
    fn small_claim_check() {
        let r = claim_check(300, &[2, 3], 7, 0.05).unwrap();
        assert_eq!(r.total_violations(), 0);
        assert!(r.dims.iter().all(|d| d.tested == 300 && d.min_slack >= 1.0));
    }
}
