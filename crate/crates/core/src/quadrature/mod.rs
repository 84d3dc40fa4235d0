//! Integration against the standard Gaussian density
//! `φ(y) = (2π)^{-n/2} exp(-|y|²/2)` on `R^n`.
//!
//! Every scheme stores its nodes in antipodal pairs `(y, -y)` with equal
//! weights, preceded by the origin when the rule has a central node. Sums run
//! pair by pair, so odd integrands cancel exactly rather than to rounding.

pub mod ball;
pub mod hermite;
pub mod sequence;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::short_hash;
use sequence::Kronecker;

/// Largest tensor rule we are willing to build.
pub const MAX_TENSOR_NODES: usize = 100_000_000;
pub const MIN_TENSOR_ORDER: usize = 2;
pub const MIN_QUASI_SAMPLES: usize = 16;

pub const DEFAULT_TENSOR_ORDER: usize = 20;
pub const DEFAULT_QUASI_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TensorHermite,
    QuasiRandom,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::TensorHermite => "tensor_hermite",
            Method::QuasiRandom => "quasi_random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tensor_hermite" | "tensor" => Ok(Method::TensorHermite),
            "quasi_random" | "quasi" => Ok(Method::QuasiRandom),
            other => Err(Error::InvalidParameter(format!("unknown quadrature method `{other}`"))),
        }
    }
}

/// The reproducible description of a scheme; nodes are regenerated from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeParams {
    pub dim: usize,
    pub method: Method,
    pub resolution: usize,
    pub seed: u64,
}

impl SchemeParams {
    /// Tensor order 20 up to three dimensions, `2^16` quasi-random samples beyond.
    pub fn default_for(dim: usize, seed: u64) -> Self {
        if dim <= 3 {
            SchemeParams { dim, method: Method::TensorHermite, resolution: DEFAULT_TENSOR_ORDER, seed }
        } else {
            SchemeParams { dim, method: Method::QuasiRandom, resolution: DEFAULT_QUASI_SAMPLES, seed }
        }
    }

    pub fn hash(&self) -> String {
        short_hash(serde_json::to_string(self).expect("plain struct").as_bytes())
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    params: SchemeParams,
    has_center: bool,
    /// Flat `len × dim` coordinates, center first, then `(y, -y)` pairs.
    coords: Vec<f64>,
    weights: Vec<f64>,
}

/// Result of [`integrate_gaussian`].
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<f64>,
    /// Max-abs difference between the full and half-resolution estimates.
    pub spread: f64,
}

pub fn build_scheme(dim: usize, method: Method, resolution: usize, seed: u64) -> Result<QuadratureScheme> {
    QuadratureScheme::from_params(SchemeParams { dim, method, resolution, seed })
}

impl QuadratureScheme {
    pub fn from_params(params: SchemeParams) -> Result<Self> {
        if params.dim == 0 {
            return Err(Error::InvalidParameter("quadrature dimension must be >= 1".into()));
        }
        match params.method {
            Method::TensorHermite => {
                if params.resolution < MIN_TENSOR_ORDER {
                    return Err(Error::ResolutionTooSmall {
                        resolution: params.resolution,
                        minimum: MIN_TENSOR_ORDER,
                    });
                }
                Self::tensor(params)
            }
            Method::QuasiRandom => {
                if params.resolution < MIN_QUASI_SAMPLES {
                    return Err(Error::ResolutionTooSmall {
                        resolution: params.resolution,
                        minimum: MIN_QUASI_SAMPLES,
                    });
                }
                Ok(Self::quasi(params, params.resolution))
            }
        }
    }

    pub fn default_for(dim: usize, seed: u64) -> Result<Self> {
        Self::from_params(SchemeParams::default_for(dim, seed))
    }

    fn tensor(params: SchemeParams) -> Result<Self> {
        let (m, n) = (params.resolution, params.dim);
        let total = u32::try_from(n)
            .ok()
            .and_then(|e| m.checked_pow(e))
            .filter(|&t| t <= MAX_TENSOR_NODES)
            .ok_or(Error::DimensionOverflow { order: m, dim: n })?;
        let (x, w) = hermite::gauss_hermite(m);

        let has_center = m % 2 == 1;
        let mut coords = Vec::with_capacity(total * n);
        let mut weights = Vec::with_capacity(total);
        let node_weight = |idx: &[usize]| idx.iter().map(|&i| w[i]).product::<f64>();
        if has_center {
            let mid = vec![m / 2; n];
            coords.extend(std::iter::repeat_n(0.0, n));
            weights.push(node_weight(&mid));
        }
        // Enumerate multi-indices; index k pairs with its mirror total-1-k.
        let mut idx = vec![0usize; n];
        for k in 0..total / 2 {
            let mut rem = k;
            for d in (0..n).rev() {
                idx[d] = rem % m;
                rem /= m;
            }
            let wk = node_weight(&idx);
            coords.extend(idx.iter().map(|&i| x[i]));
            coords.extend(idx.iter().map(|&i| x[m - 1 - i]));
            weights.push(wk);
            weights.push(wk);
        }
        Ok(QuadratureScheme { params, has_center, coords, weights })
    }

    fn quasi(params: SchemeParams, count: usize) -> Self {
        let n = params.dim;
        let seq = Kronecker::new(n, params.seed);
        let has_center = count % 2 == 1;
        let w = 1.0 / count as f64;
        let mut coords = Vec::with_capacity(count * n);
        if has_center {
            coords.extend(std::iter::repeat_n(0.0, n));
        }
        let mut y = vec![0.0; n];
        for i in 0..(count / 2) as u64 {
            seq.gaussian_point(i, &mut y);
            coords.extend_from_slice(&y);
            coords.extend(y.iter().map(|v| -v));
        }
        QuadratureScheme { params, has_center, coords, weights: vec![w; count] }
    }

    /// The half-resolution companion used for the spread diagnostic.
    pub fn coarse(&self) -> QuadratureScheme {
        match self.params.method {
            Method::TensorHermite => {
                let p = SchemeParams { resolution: (self.params.resolution / 2).max(1), ..self.params };
                Self::tensor(p).expect("coarser than an existing rule")
            }
            Method::QuasiRandom => Self::quasi(self.params, self.params.resolution / 2),
        }
    }

    pub fn params(&self) -> SchemeParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn method(&self) -> Method {
        self.params.method
    }

    pub fn resolution(&self) -> usize {
        self.params.resolution
    }

    pub fn seed(&self) -> u64 {
        self.params.seed
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let n = self.params.dim;
        &self.coords[i * n..(i + 1) * n]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.params.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.params).expect("plain struct")
    }

    /// `Σ w_i g(y_i)` for a vector integrand of length `out_dim` that writes
    /// into the provided buffer. Fails on the first non-finite value.
    pub fn integrate_into<G>(&self, out_dim: usize, mut g: G) -> Result<Vec<f64>>
    where
        G: FnMut(&[f64], &mut [f64]),
    {
        let mut acc = vec![0.0; out_dim];
        let mut a = vec![0.0; out_dim];
        let mut b = vec![0.0; out_dim];
        let mut eval = |y: &[f64], buf: &mut [f64]| -> Result<()> {
            g(y, buf);
            if buf.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(Error::NonFiniteIntegrand(y.to_vec()))
            }
        };
        let mut i = 0;
        if self.has_center {
            eval(self.node(0), &mut a)?;
            for (s, v) in acc.iter_mut().zip(&a) {
                *s += self.weights[0] * v;
            }
            i = 1;
        }
        while i < self.len() {
            eval(self.node(i), &mut a)?;
            eval(self.node(i + 1), &mut b)?;
            let w = self.weights[i];
            for ((s, u), v) in acc.iter_mut().zip(&a).zip(&b) {
                *s += w * (u + v);
            }
            i += 2;
        }
        Ok(acc)
    }
}

/// Integrates `g` against `φ`, with a two-level convergence diagnostic.
pub fn integrate_gaussian<G>(scheme: &QuadratureScheme, out_dim: usize, g: G) -> Result<Integral>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let write = |y: &[f64], out: &mut [f64]| {
        let v = g(y);
        out.copy_from_slice(&v[..out.len()]);
    };
    let value = scheme.integrate_into(out_dim, write)?;
    let coarse = scheme.coarse().integrate_into(out_dim, write)?;
    let spread = value
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Integral { value, spread })
}
