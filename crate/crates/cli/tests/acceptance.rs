//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs under `cargo test` as its own harness.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qcext::certify::{
    certify_pairs, claim_check, claim_constant, composition_monotonicity_demo, matrix_delta,
    trivial_extension_witness, trivial_extension_witnesses, two_point_delta, two_point_ratio,
};
use qcext::differential::{extension_jacobian, finite_difference_jacobian};
use qcext::extension::{extend_point, ExtensionField, TrivialExtension};
use qcext::geometry::relative_frobenius_error;
use qcext::hyperbolic::{default_grid, lattice_grid, vertical_comparison};
use qcext::map::gallery;
use qcext::measure::{doubling_report, Density};
use qcext::sampling::{rng, uniform_box, PairSampler};
use qcext::{build_scheme, integrate_gaussian, HalfSpacePoint, MapSpec, Method, QuadratureScheme, SquareMatrix};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn field(spec: MapSpec) -> ExtensionField {
    let n = spec.dim();
    ExtensionField::new(spec, QuadratureScheme::default_for(n, 0).unwrap()).unwrap()
}

fn random_points(seed: u64, dim: usize, count: usize, half_width: f64, t: (f64, f64)) -> Vec<HalfSpacePoint> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let x = uniform_box(&mut r, dim, half_width);
            HalfSpacePoint::from_coords(&x, r.random_range(t.0..t.1)).unwrap()
        })
        .collect()
}

fn closed_form_oracle() -> Outcome {
    let mut worst_id: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    for dim in [2, 3] {
        let pts = random_points(100 + dim as u64, dim, 100, 3.0, (0.05, 4.0));
        let id = field(MapSpec::identity(dim).unwrap());
        let (_, lin_spec) = gallery(dim).swap_remove(1);
        let a = lin_spec.jacobian_at(&vec![0.0; dim]).unwrap();
        let lin = field(lin_spec);
        for p in &pts {
            let img = extend_point(&id, p).unwrap();
            for i in 0..dim {
                worst_id = worst_id.max((img[i] - p.base[i]).abs());
            }
            worst_id = worst_id.max((img[dim] - dim as f64 * p.height).abs());

            let img = extend_point(&lin, p).unwrap();
            let ax = &a * DVector::from_column_slice(&p.base);
            for i in 0..dim {
                worst_lin = worst_lin.max((img[i] - ax[i]).abs());
            }
            worst_lin = worst_lin.max((img[dim] - p.height * a.trace()).abs());
        }
    }
    ensure(worst_id <= 1e-10, || format!("identity error {worst_id:e} > 1e-10"))?;
    ensure(worst_lin <= 1e-8, || format!("linear error {worst_lin:e} > 1e-8"))?;
    Ok(format!("identity max err {worst_id:.1e}, linear max err {worst_lin:.1e} (n=2,3; 100 points each)"))
}

fn boundary_trace() -> Outcome {
    let mut checked = 0;
    for dim in [2, 3] {
        let mut r = rng(200 + dim as u64);
        for (name, spec) in gallery(dim) {
            let f = field(spec.clone());
            for _ in 0..100 {
                let x = uniform_box(&mut r, dim, 4.0);
                let img = extend_point(&f, &HalfSpacePoint::from_coords(&x, 0.0).unwrap()).unwrap();
                let mut want = spec.eval(&x);
                want.push(0.0);
                ensure(img.to_vec() == want, || format!("{name} (n={dim}) at {x:?}: {:?} != {want:?}", img.to_vec()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} boundary points exact over the gallery"))
}

fn jacobian_consistency() -> Outcome {
    let pts = random_points(300, 2, 50, 2.0, (0.1, 2.0));
    let mut worst: f64 = 0.0;
    for (name, spec) in gallery(2) {
        let f = field(spec);
        for p in &pts {
            let a = extension_jacobian(&f, p).unwrap();
            let fd = finite_difference_jacobian(|q| f.eval_lifted(q), &p.lifted(), 1e-5).unwrap();
            let err = relative_frobenius_error(a.as_matrix(), fd.as_matrix());
            ensure(err <= 1e-4, || format!("{name} at {p:?}: relative error {err:e}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("worst relative Frobenius error {worst:.1e} (7 specs x 50 points)"))
}

fn claim_brute_force() -> Outcome {
    let c1 = claim_constant(1.0).unwrap();
    let want = (2.0 - 3f64.sqrt()).powi(2);
    ensure((c1 - want).abs() <= 1e-10, || format!("c(1) = {c1}, expected {want}"))?;
    let report = claim_check(10_000, &[2, 3], 7, 0.05).unwrap();
    for d in &report.dims {
        ensure(d.tested == 10_000, || format!("n={} tested only {}", d.dim, d.tested))?;
        ensure(d.violations == 0, || format!("n={}: {} violations", d.dim, d.violations))?;
    }
    let slack: Vec<String> = report.dims.iter().map(|d| format!("n={} min slack {:.3}", d.dim, d.min_slack)).collect();
    Ok(format!("c(1) = {c1:.7}; 0 violations in 2x10^4 matrices; {}", slack.join(", ")))
}

fn rotation_delta() -> Outcome {
    let rot = MapSpec::planar_rotation(2, FRAC_PI_4).unwrap();
    let cert = two_point_delta(&rot, &PairSampler::default()).unwrap();
    let err = (cert.delta_hat - FRAC_PI_4.cos()).abs();
    ensure(err <= 1e-3, || format!("two_point_delta {} off by {err:e}", cert.delta_hat))?;
    let mut worst: f64 = 0.0;
    for theta in [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
        let d = matrix_delta(&SquareMatrix::rotation(theta)).unwrap();
        worst = worst.max((d - theta.cos()).abs());
    }
    ensure(worst <= 1e-6, || format!("matrix_delta off by {worst:e}"))?;
    Ok(format!("two-point error {err:.1e}, matrix error {worst:.1e}"))
}

fn extension_monotonicity() -> Outcome {
    let f = field(MapSpec::power_radial(2, 1.0).unwrap());
    let sampler = PairSampler { pairs: 90_000, crossing: 10_000, ..Default::default() };
    let cert = two_point_delta(&f, &sampler).unwrap();
    ensure(cert.samples == 100_000, || format!("only {} pairs", cert.samples))?;
    ensure(cert.collapsed == 0, || format!("{} collapsed pairs", cert.collapsed))?;
    ensure(cert.delta_hat > 0.0, || format!("non-positive ratio {} at {:?}", cert.delta_hat, cert.witness))?;
    let mut heights = Vec::new();
    for (a, b) in sampler.sample(3) {
        for p in [a, b] {
            if p[2] > 0.0 {
                heights.push(p);
            }
        }
    }
    let min_vertical = heights
        .iter()
        .map(|p| f.eval_lifted(p).unwrap()[2])
        .fold(f64::INFINITY, f64::min);
    ensure(min_vertical >= -1e-10, || format!("F^(n+1) = {min_vertical:e} < -1e-10"))?;
    Ok(format!(
        "min ratio {:.4e} over 10^5 pairs (10^4 crossing); min F^(n+1) {min_vertical:.3e} over {} upper points",
        cert.delta_hat,
        heights.len()
    ))
}

fn trivial_extension_refutation() -> Outcome {
    let start = Instant::now();
    let lift = TrivialExtension(MapSpec::power_radial(2, 1.0).unwrap());
    let cert = certify_pairs(&lift, &trivial_extension_witnesses(2, (0.0, 4.0), 41), 0).unwrap();
    let (a, b) = trivial_extension_witness(2, 400.0);
    let at_400 = two_point_ratio(&lift, &a, &b).unwrap().unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    ensure(cert.delta_hat <= 0.1, || format!("best ratio {} > 0.1", cert.delta_hat))?;
    ensure((at_400 - 2.0 / 400f64.sqrt()).abs() < 2e-3, || format!("ratio at R=400 is {at_400}"))?;
    ensure(elapsed < 10.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!("min ratio {:.4} (ratio {at_400:.5} at R=400) in {elapsed:.3}s", cert.delta_hat))
}

fn composition_demo() -> Outcome {
    let r = composition_monotonicity_demo(FRAC_PI_3, FRAC_PI_3).unwrap();
    ensure((r.delta_first - 0.5).abs() <= 1e-6 && (r.delta_second - 0.5).abs() <= 1e-6, || {
        format!("factor deltas {} {}", r.delta_first, r.delta_second)
    })?;
    let d = r.sampled_composed.delta_hat;
    ensure(d <= -0.5 + 1e-6, || format!("composition min ratio {d} > -0.5 + 1e-6"))?;
    Ok(format!("factors {:.9}, {:.9}; composition sampled ratio {d:.9}", r.delta_first, r.delta_second))
}

fn convex_potential_symmetry() -> Outcome {
    let f = field(MapSpec::convex_gradient_quartic(2, 1.0, 0.5).unwrap());
    let (mut worst_asym, mut worst_eig): (f64, f64) = (0.0, f64::INFINITY);
    for p in random_points(900, 2, 50, 2.0, (0.05, 3.0)) {
        let df = extension_jacobian(&f, &p).unwrap();
        let m: &DMatrix<f64> = df.as_matrix();
        worst_asym = worst_asym.max((m - m.transpose()).norm() / m.norm());
        worst_eig = worst_eig.min(SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.min());
    }
    ensure(worst_asym <= 1e-6, || format!("asymmetry {worst_asym:e}"))?;
    ensure(worst_eig >= -1e-8, || format!("eigenvalue {worst_eig:e}"))?;
    Ok(format!("max asymmetry {worst_asym:.1e}, min eigenvalue {worst_eig:.3}"))
}

fn hyperbolic_comparison() -> Outcome {
    let id = vertical_comparison(&field(MapSpec::identity(2).unwrap()), &default_grid(2)).unwrap();
    let id_err = id.rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    ensure(id_err <= 1e-8, || format!("identity ratio off by {id_err:e}"))?;
    let f = field(MapSpec::power_radial(2, 1.0).unwrap());
    let coarse = vertical_comparison(&f, &default_grid(2)).unwrap();
    let heights: Vec<f64> = (0..7).map(|k| 0.25 * 2f64.powf(k as f64 / 2.0)).collect();
    let fine = vertical_comparison(&f, &lattice_grid(2, 17, 2.0, &heights).unwrap()).unwrap();
    ensure(coarse.spread.is_finite() && fine.spread.is_finite(), || "infinite spread".into())?;
    let change = fine.spread / coarse.spread - 1.0;
    ensure(change.abs() <= 0.1, || format!("spread {} -> {}", coarse.spread, fine.spread))?;
    Ok(format!(
        "identity err {id_err:.1e}; |x|x ratios in [{:.4}, {:.4}], spread {:.4} -> {:.4} refined ({:+.2}%)",
        coarse.min,
        coarse.max,
        coarse.spread,
        fine.spread,
        100.0 * change
    ))
}

fn doubling() -> Outcome {
    let mut r = rng(1100);
    for dim in [2usize, 3] {
        let centers: Vec<Vec<f64>> = (0..5).map(|_| uniform_box(&mut r, dim, 3.0)).collect();
        let rep = doubling_report(&Density::lebesgue(dim), &centers, &[0.01, 1.0, 100.0]).unwrap();
        let want = 2f64.powi(dim as i32);
        let err = rep.balls.iter().map(|b| (b.ratio - want).abs()).fold(0.0, f64::max);
        ensure(err <= 1e-6, || format!("Lebesgue n={dim} off by {err:e}"))?;
    }
    let radial = Density::jacobian_norm(MapSpec::power_radial(2, 1.0).unwrap());
    let rep = doubling_report(&radial, &[vec![0.0, 0.0]], &[0.1, 1.0, 10.0]).unwrap();
    let err = rep.balls.iter().map(|b| (b.ratio - 8.0).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-4, || format!("2|x| density off by {err:e}"))?;
    let centers: Vec<Vec<f64>> = (0..20).map(|_| uniform_box(&mut r, 2, 3.0)).collect();
    let radii: Vec<f64> = (0..6).map(|k| 10f64.powf(-2.0 + 0.8 * k as f64)).collect();
    let mut consts = Vec::new();
    for (name, spec) in gallery(2) {
        let c = doubling_report(&Density::jacobian_norm(spec), &centers, &radii).unwrap().constant_hat;
        ensure(c.is_finite(), || format!("{name}: constant {c}"))?;
        consts.push(format!("{name} {c:.3}"));
    }
    Ok(format!("2|x| err {err:.1e}; constants: {}", consts.join(", ")))
}

fn quadrature_moments() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [3, 5, 10, 20] {
        let s = build_scheme(2, Method::TensorHermite, m, 0).unwrap();
        let v = integrate_gaussian(&s, 3, |y| vec![1.0, y[0] * y[0], y[1].powi(4)]).unwrap().value;
        for (got, want) in v.iter().zip([1.0, 1.0, 3.0]) {
            worst = worst.max((got - want).abs() / want);
        }
    }
    ensure(worst <= 1e-10, || format!("tensor moments off by {worst:e}"))?;
    let s = build_scheme(2, Method::QuasiRandom, 1 << 16, 0).unwrap();
    let v = integrate_gaussian(&s, 3, |y| vec![1.0, y[0] * y[0], y[1].powi(4)]).unwrap().value;
    let qerr = v.iter().zip([1.0, 1.0, 3.0]).map(|(g, w)| (g - w).abs() / w).fold(0.0, f64::max);
    ensure(qerr <= 1e-2, || format!("quasi-random moments {v:?}"))?;
    Ok(format!("tensor rel err {worst:.1e}; quasi-random rel err {qerr:.1e} ({:.5}, {:.5}, {:.5})", v[0], v[1], v[2]))
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_qcext");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = r#"{"kind":"power_radial","dim":2,"params":{"p":1}}"#;
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("extend.csv", vec!["extend", "--spec", spec, "--x", "1,-2", "--t", "0,0.5,2", "--seed", "3"]),
        ("extend_quasi.json", vec!["extend", "--spec", spec, "--x", "1,-2", "--t", "0.5", "--method", "quasi_random", "--resolution", "4096", "--seed", "5", "--format", "json"]),
        ("jacobian.csv", vec!["jacobian", "--spec", spec, "--x", "0.3,0.1", "--t", "1"]),
        ("delta.json", vec!["certify-delta", "--spec", spec, "--target", "extension", "--pairs", "300", "--crossing", "100", "--seed", "11"]),
        ("qs.csv", vec!["certify-qs", "--spec", spec, "--triples", "500", "--seed", "2"]),
        ("claim.json", vec!["claim-check", "--matrices", "200", "--seed", "7"]),
        ("doubling.csv", vec!["doubling", "--spec", spec, "--random-centers", "4", "--seed", "8"]),
        ("moments.json", vec!["moments", "--spec", spec, "--halfspace", "0,1"]),
        ("hyperbolic.json", vec!["hyperbolic", "--spec", spec, "--per-axis", "3", "--pairs", "200", "--format", "json", "--seed", "4"]),
        ("composition.json", vec!["demo-composition"]),
        ("trivial.json", vec!["demo-trivial-failure"]),
    ];
    for (file, args) in &runs {
        let mut contents = Vec::new();
        for attempt in 0..2 {
            let path = dir.path().join(format!("{attempt}_{file}"));
            let status = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(&path)
                .arg("--threads")
                .arg(if attempt == 0 { "1" } else { "2" })
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.code() == Some(0), || format!("{file}: exit {status}"))?;
            contents.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(contents[0] == contents[1], || format!("{file}: outputs differ between runs"))?;
        let text = String::from_utf8_lossy(&contents[0]);
        ensure(text.contains("seed"), || format!("{file}: no seed in metadata"))?;
        if args.contains(&"--spec") {
            ensure(text.contains("spec_hash"), || format!("{file}: no spec hash in metadata"))?;
        }
    }
    Ok(format!("{} subcommand invocations byte-identical across repeated runs", runs.len()))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("closed-form extension oracle", closed_form_oracle),
        ("boundary trace", boundary_trace),
        ("jacobian consistency", jacobian_consistency),
        ("claim brute force", claim_brute_force),
        ("rotation delta oracle", rotation_delta),
        ("extension stays delta-monotone", extension_monotonicity),
        ("trivial extension refutation", trivial_extension_refutation),
        ("rotation composition demo", composition_demo),
        ("convex potential symmetry", convex_potential_symmetry),
        ("hyperbolic comparison", hyperbolic_comparison),
        ("doubling", doubling),
        ("quadrature moments", quadrature_moments),
        ("cli reproducibility", reproducibility),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
