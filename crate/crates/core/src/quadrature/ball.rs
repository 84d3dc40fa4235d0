//! Fixed cubature on the unit ball of `R^n`.
//!
//! `n = 1` uses 32-point Gauss–Legendre, `n = 2` a polar product rule with
//! 32 Gauss–Legendre radii and 64 equispaced angles, and `n >= 3` equal
//! weights on `2^15` low-discrepancy points kept by rejection from the cube.
//! Weights always sum to the exact ball volume.

use std::f64::consts::PI;
use std::sync::Arc;

use super::sequence::Kronecker;

pub const RADIAL_NODES: usize = 32;
pub const ANGULAR_NODES: usize = 64;
pub const BALL_SAMPLES: usize = 1 << 15;

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // P_m'(x) = m (x P_m - P_{m-1}) / (x² - 1)
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

#[derive(Debug, Clone)]
pub struct BallRule {
    dim: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl BallRule {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        let (nodes, weights) = match dim {
            1 => {
                let (x, w) = gauss_legendre(RADIAL_NODES);
                (x.into_iter().map(|v| vec![v]).collect(), w)
            }
            2 => {
                let (x, w) = gauss_legendre(RADIAL_NODES);
                let mut nodes = Vec::with_capacity(RADIAL_NODES * ANGULAR_NODES);
                let mut weights = Vec::with_capacity(RADIAL_NODES * ANGULAR_NODES);
                let dtheta = 2.0 * PI / ANGULAR_NODES as f64;
                for (xi, wi) in x.iter().zip(&w) {
                    let r = 0.5 * (xi + 1.0);
                    let wr = 0.5 * wi * r;
                    for j in 0..ANGULAR_NODES {
                        let (s, c) = (j as f64 * dtheta).sin_cos();
                        nodes.push(vec![r * c, r * s]);
                        weights.push(wr * dtheta);
                    }
                }
                (nodes, weights)
            }
            _ => {
                let seq = Kronecker::new(dim, 0);
                let mut u = vec![0.0; dim];
                let mut nodes = Vec::with_capacity(BALL_SAMPLES);
                let mut i = 0u64;
                while nodes.len() < BALL_SAMPLES {
                    seq.unit_point(i, &mut u);
                    i += 1;
                    let y: Vec<f64> = u.iter().map(|v| 2.0 * v - 1.0).collect();
                    if y.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                        nodes.push(y);
                    }
                }
                let w = unit_ball_volume(dim) / BALL_SAMPLES as f64;
                (nodes, vec![w; BALL_SAMPLES])
            }
        };
        BallRule { dim, nodes, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Process-wide rule for `dim`, built on first use.
    pub fn shared(dim: usize) -> Arc<BallRule> {
        use std::collections::HashMap;
        use std::sync::{Mutex, OnceLock};
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BallRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("ball rule cache poisoned");
        guard.entry(dim).or_insert_with(|| Arc::new(BallRule::new(dim))).clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// `∫_{B(center, radius)} g(z) dz`.
    pub fn integrate<G: FnMut(&[f64]) -> f64>(&self, center: &[f64], radius: f64, mut g: G) -> f64 {
        let mut z = vec![0.0; self.dim];
        let mut acc = 0.0;
        for (y, w) in self.nodes.iter().zip(&self.weights) {
            for ((zi, ci), yi) in z.iter_mut().zip(center).zip(y) {
                *zi = ci + radius * yi;
            }
            acc += w * g(&z);
        }
        acc * radius.powi(self.dim as i32)
    }

    /// Fallible variant; the first error aborts the sum.
    pub fn try_integrate<E, G>(&self, center: &[f64], radius: f64, mut g: G) -> Result<f64, E>
    where
        G: FnMut(&[f64]) -> Result<f64, E>,
    {
        let mut z = vec![0.0; self.dim];
        let mut acc = 0.0;
        for (y, w) in self.nodes.iter().zip(&self.weights) {
            for ((zi, ci), yi) in z.iter_mut().zip(center).zip(y) {
                *zi = ci + radius * yi;
            }
            acc += w * g(&z)?;
        }
        Ok(acc * radius.powi(self.dim as i32))
    }
}
