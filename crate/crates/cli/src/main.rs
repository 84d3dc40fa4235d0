//! `qcext`: command-line driver for the Gaussian extension and its
//! certification suite.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a certified
//! property is violated.

mod output;

use std::f64::consts::FRAC_PI_3;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcext::certify::{
    certify_pairs, claim_check, composition_monotonicity_demo, quasisymmetry_profile, trivial_extension_witness,
    trivial_extension_witnesses, two_point_delta, two_point_ratio,
};
use qcext::differential::{extension_jacobian, write_jacobian_csv};
use qcext::extension::{extend_grid, ExtensionField, TrivialExtension};
use qcext::hyperbolic::{bilipschitz_sample, lattice_grid, sample_pairs, vertical_comparison};
use qcext::map::PointMap;
use qcext::measure::{doubling_report, gaussian_moment_ratio, Density};
use qcext::quadrature::{DEFAULT_QUASI_SAMPLES, DEFAULT_TENSOR_ORDER};
use qcext::sampling::{self, HalfSpacePairSampler, PairSampler, TripleSampler};
use qcext::{parse_map_spec, HalfSpacePoint, MapSpec, Method, QuadratureScheme, SchemeParams};
use serde_json::json;

use output::{csv_string, emit, Artifact, Meta};

#[derive(Parser, Debug)]
#[command(name = "qcext", version, about = "Gaussian extension of delta-monotone maps and its certification suite")]
struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct SchemeArgs {
    /// tensor_hermite or quasi_random.
    #[arg(long)]
    method: Option<Method>,
    /// Tensor order per axis, or number of quasi-random samples.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SchemeArgs {
    fn params(&self, dim: usize) -> SchemeParams {
        let mut p = SchemeParams::default_for(dim, self.seed);
        if let Some(m) = self.method {
            p.method = m;
            p.resolution = match m {
                Method::TensorHermite => DEFAULT_TENSOR_ORDER,
                Method::QuasiRandom => DEFAULT_QUASI_SAMPLES,
            };
        }
        if let Some(r) = self.resolution {
            p.resolution = r;
        }
        p
    }

    fn field(&self, spec: MapSpec) -> Result<ExtensionField> {
        let scheme = QuadratureScheme::from_params(self.params(spec.dim()))?;
        Ok(ExtensionField::new(spec, scheme)?)
    }
}

#[derive(Args, Debug, Clone)]
struct PointArgs {
    /// Base point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    /// Height(s), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    t: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    /// The base map f.
    Base,
    /// The Gaussian extension F.
    Extension,
    /// The trivial lift (x, t) -> (f(x), t).
    Trivial,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate F(x, t).
    Extend {
        /// Map spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Jacobian DF(x, t) for t > 0.
    Jacobian {
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Empirical two-point monotonicity constant.
    CertifyDelta {
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum, default_value = "base")]
        target: Target,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        /// Extra pairs straddling the hyperplane x_last = 0.
        #[arg(long, default_value_t = 0)]
        crossing: usize,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Empirical quasisymmetry modulus.
    CertifyQs {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 10_000)]
        triples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Brute-force check of sigma_min >= c(delta) sigma_max on random matrices.
    ClaimCheck {
        #[arg(long, default_value_t = 10_000)]
        matrices: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        min_delta: f64,
    },
    /// Doubling ratios mu(2B)/mu(B).
    Doubling {
        #[command(flatten)]
        density: DensityArgs,
        /// Ball centers as `x,y;x,y;...`.
        #[arg(long, allow_hyphen_values = true)]
        centers: Option<String>,
        /// Number of random centers in [-3, 3]^n when --centers is absent.
        #[arg(long, default_value_t = 20)]
        random_centers: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.063095734448019,0.398107170553497,2.51188643150958,15.8489319246111,100")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gaussian moments against the unit-ball mass.
    Moments {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        p: Vec<f64>,
        /// Restrict to the half-space <y, normal> >= 0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        halfspace: Option<Vec<f64>>,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Compare ||DF|| t with F^{n+1} on a grid and sample hyperbolic distance ratios.
    Hyperbolic {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 9)]
        per_axis: usize,
        #[arg(long, default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
        heights: Vec<f64>,
        /// Random pairs for the distance-ratio sample (json output only).
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Two monotone rotations whose composition is not monotone.
    DemoComposition {
        #[arg(long, default_value_t = FRAC_PI_3, allow_hyphen_values = true)]
        theta1: f64,
        #[arg(long, default_value_t = FRAC_PI_3, allow_hyphen_values = true)]
        theta2: f64,
    },
    /// The trivial lift of |x|x is not delta-monotone.
    DemoTrivialFailure {
        /// Base map; defaults to |x|x in the plane.
        #[arg(long)]
        spec: Option<String>,
        /// log10 range of the witness radii.
        #[arg(long, value_delimiter = ',', default_value = "0,4")]
        radii_log10: Vec<f64>,
        #[arg(long, default_value_t = 41)]
        count: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct DensityArgs {
    /// Use rho = ||Df|| for this spec; Lebesgue measure when absent.
    #[arg(long)]
    spec: Option<String>,
    /// Dimension of the Lebesgue density.
    #[arg(long, default_value_t = 2)]
    dim: usize,
}

impl DensityArgs {
    fn resolve(&self) -> Result<(Density, Option<MapSpec>)> {
        match &self.spec {
            Some(s) => {
                let spec = load_spec(s)?;
                Ok((Density::jacobian_norm(spec.clone()), Some(spec)))
            }
            None => {
                if self.dim == 0 {
                    bail!("--dim must be >= 1");
                }
                Ok((Density::lebesgue(self.dim), None))
            }
        }
    }
}

/// A property check failed; maps to exit code 2.
#[derive(Debug)]
struct Violation(String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "property violated: {}", self.0)
    }
}

impl std::error::Error for Violation {}

fn load_spec(arg: &str) -> Result<MapSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading spec file {arg}"))?
    };
    Ok(parse_map_spec(&text)?)
}

fn points(p: &PointArgs) -> Result<Vec<HalfSpacePoint>> {
    Ok(p.t.iter().map(|&t| HalfSpacePoint::from_coords(&p.x, t)).collect::<qcext::Result<Vec<_>>>()?)
}

fn csv(body: String) -> Artifact {
    Artifact::Csv { body, rows_only_on_stdout: false }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be >= 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = cli.out.as_deref();
    let json_out = |default_json: bool| cli.format.map_or(default_json, |f| f == Format::Json);

    match cli.command {
        Command::Extend { spec, point, scheme } => {
            let spec = load_spec(&spec)?;
            let field = scheme.field(spec.clone())?;
            let table = extend_grid(&field, &points(&point)?)?;
            let meta = Meta::new("extend", scheme.seed).with_spec(&spec).with_scheme(field.scheme().params());
            let artifact = if json_out(false) {
                Artifact::Json(table.to_json())
            } else {
                Artifact::Csv { body: csv_string(|b| table.write_csv(b))?, rows_only_on_stdout: true }
            };
            emit(&meta, artifact, out)
        }
        Command::Jacobian { spec, point, scheme } => {
            let spec = load_spec(&spec)?;
            let field = scheme.field(spec.clone())?;
            let pts = points(&point)?;
            let meta = Meta::new("jacobian", scheme.seed).with_spec(&spec).with_scheme(field.scheme().params());
            let mats = pts.iter().map(|p| extension_jacobian(&field, p)).collect::<qcext::Result<Vec<_>>>()?;
            let artifact = if json_out(false) {
                let list: Vec<_> = pts
                    .iter()
                    .zip(&mats)
                    .map(|(p, m)| json!({ "x": p.base, "t": p.height, "matrix": m.rows() }))
                    .collect();
                Artifact::Json(json!(list))
            } else {
                let mut body = String::new();
                for (p, m) in pts.iter().zip(&mats) {
                    body += &csv_string(|b| {
                        write_jacobian_csv(b, m, p, &spec.hash(), &field.scheme().params().hash())
                    })?;
                }
                csv(body)
            };
            emit(&meta, artifact, out)
        }
        Command::CertifyDelta { spec, target, pairs, crossing, scheme } => {
            let spec = load_spec(&spec)?;
            let sampler = PairSampler { seed: scheme.seed, pairs, crossing, ..Default::default() };
            let mut meta = Meta::new("certify-delta", scheme.seed).with_spec(&spec);
            let cert = match target {
                Target::Base => two_point_delta(&spec, &sampler)?,
                Target::Trivial => two_point_delta(&TrivialExtension(spec.clone()), &sampler)?,
                Target::Extension => {
                    let field = scheme.field(spec.clone())?;
                    meta = meta.with_scheme(field.scheme().params());
                    two_point_delta(&field, &sampler)?
                }
            };
            let result = json!({ "target": format!("{target:?}").to_lowercase(), "sampler": sampler, "certificate": cert });
            emit(&meta, Artifact::Json(result), out)?;
            if cert.delta_hat <= 0.0 {
                return Err(Violation(format!("sampled pair with ratio {} <= 0", cert.delta_hat)).into());
            }
            Ok(())
        }
        Command::CertifyQs { spec, triples, seed } => {
            let spec = load_spec(&spec)?;
            let sampler = TripleSampler { seed, triples, ..Default::default() };
            let profile = quasisymmetry_profile(&spec, &sampler)?;
            let meta = Meta::new("certify-qs", seed).with_spec(&spec);
            let artifact = if json_out(false) {
                Artifact::Json(json!({ "sampler": sampler, "profile": profile }))
            } else {
                csv(csv_string(|b| profile.write_csv(b))?)
            };
            emit(&meta, artifact, out)
        }
        Command::ClaimCheck { matrices, dims, seed, min_delta } => {
            let report = claim_check(matrices, &dims, seed, min_delta)?;
            emit(&Meta::new("claim-check", seed), Artifact::Json(serde_json::to_value(&report)?), out)?;
            let bad = report.total_violations();
            if bad > 0 {
                return Err(Violation(format!("{bad} matrices break the claim or the delta/gamma chain")).into());
            }
            Ok(())
        }
        Command::Doubling { density, centers, random_centers, radii, seed } => {
            let (density, spec) = density.resolve()?;
            let n = density.dim();
            let centers = match centers {
                Some(text) => parse_centers(&text, n)?,
                None => {
                    let mut rng = sampling::rng(seed);
                    (0..random_centers).map(|_| sampling::uniform_box(&mut rng, n, 3.0)).collect()
                }
            };
            let report = doubling_report(&density, &centers, &radii)?;
            let mut meta = Meta::new("doubling", seed);
            if let Some(s) = &spec {
                meta = meta.with_spec(s);
            }
            let artifact = if json_out(false) {
                Artifact::Json(serde_json::to_value(&report)?)
            } else {
                csv(csv_string(|b| report.write_csv(b))?)
            };
            emit(&meta, artifact, out)
        }
        Command::Moments { density, p, halfspace, scheme } => {
            let (density, spec) = density.resolve()?;
            let quad = QuadratureScheme::from_params(scheme.params(density.dim()))?;
            let rows = p
                .iter()
                .map(|&p| {
                    let r = gaussian_moment_ratio(&density, p, halfspace.as_deref(), &quad)?;
                    Ok(json!({ "p": p, "integral": r.integral, "unit_ball_mass": r.unit_ball_mass, "ratio": r.ratio }))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut meta = Meta::new("moments", scheme.seed).with_scheme(quad.params());
            if let Some(s) = &spec {
                meta = meta.with_spec(s);
            }
            emit(&meta, Artifact::Json(json!({ "halfspace": halfspace, "moments": rows })), out)
        }
        Command::Hyperbolic { spec, per_axis, half_width, heights, pairs, scheme } => {
            let spec = load_spec(&spec)?;
            let field = scheme.field(spec.clone())?;
            let grid = lattice_grid(spec.dim(), per_axis, half_width, &heights)?;
            let report = vertical_comparison(&field, &grid)?;
            let meta = Meta::new("hyperbolic", scheme.seed).with_spec(&spec).with_scheme(field.scheme().params());
            if json_out(false) {
                let mut result = json!({
                    "grid": { "per_axis": per_axis, "half_width": half_width, "heights": heights },
                    "comparison": report,
                });
                if pairs > 0 {
                    let sampler = HalfSpacePairSampler { seed: scheme.seed, pairs, ..Default::default() };
                    let b = bilipschitz_sample(&field, &sample_pairs(&sampler, spec.dim())?)?;
                    result["bilipschitz"] = json!({
                        "sampler": sampler, "min": b.min, "max": b.max, "spread": b.spread, "excluded": b.excluded,
                    });
                }
                emit(&meta, Artifact::Json(result), out)
            } else {
                emit(&meta, csv(csv_string(|b| report.write_csv(b))?), out)
            }
        }
        Command::DemoComposition { theta1, theta2 } => {
            let report = composition_monotonicity_demo(theta1, theta2)?;
            emit(&Meta::new("demo-composition", report.sampled_composed.seed), Artifact::Json(serde_json::to_value(&report)?), out)
        }
        Command::DemoTrivialFailure { spec, radii_log10, count } => {
            let spec = match spec {
                Some(s) => load_spec(&s)?,
                None => MapSpec::power_radial(2, 1.0)?,
            };
            if radii_log10.len() != 2 || count == 0 || spec.dim() < 2 {
                bail!("--radii-log10 takes two values, --count must be positive and the map needs dim >= 2");
            }
            let lift = TrivialExtension(spec.clone());
            let pairs = trivial_extension_witnesses(spec.dim(), (radii_log10[0], radii_log10[1]), count);
            let cert = certify_pairs(&lift, &pairs, 0)?;
            let (a, b) = trivial_extension_witness(spec.dim(), 400.0);
            let at_400 = two_point_ratio(&lift, &a, &b)?;
            let base = two_point_delta(&spec, &PairSampler { pairs: 2000, ..Default::default() })?;
            let result = json!({
                "base_delta_hat": base.delta_hat,
                "trivial_lift": cert,
                "ratio_at_radius_400": at_400,
                "lift_dim": lift.dim(),
            });
            emit(&Meta::new("demo-trivial-failure", 0).with_spec(&spec), Artifact::Json(result), out)
        }
    }
}

fn parse_centers(text: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|c| {
            let v = c
                .split(',')
                .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad center coordinate {s:?}")))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != dim {
                bail!("center {c:?} has {} coordinates, expected {dim}", v.len());
            }
            Ok(v)
        })
        .collect()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Violation>().is_some() {
        return 2;
    }
    match err.downcast_ref::<qcext::Error>() {
        Some(qcext::Error::VanishingVertical { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
