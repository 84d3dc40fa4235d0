//! Additive-recurrence (Kronecker) low-discrepancy points with a seeded
//! Cranley–Patterson shift, and their Gaussian image through the inverse CDF.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Root of `x^(d+1) = x + 1`, the generalized golden ratio.
fn generalized_golden_ratio(dim: usize) -> f64 {
    let k = dim as i32 + 1;
    let mut x = 2.0_f64;
    for _ in 0..64 {
        let fx = x.powi(k) - x - 1.0;
        let dfx = k as f64 * x.powi(k - 1) - 1.0;
        let step = fx / dfx;
        x -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    x
}

#[derive(Debug, Clone)]
pub struct Kronecker {
    alpha: Vec<f64>,
    shift: Vec<f64>,
}

impl Kronecker {
    pub fn new(dim: usize, seed: u64) -> Self {
        let g = generalized_golden_ratio(dim);
        let alpha = (1..=dim).map(|j| (1.0 / g.powi(j as i32)).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        Kronecker { alpha, shift }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// The `i`-th point of the unit cube, strictly inside `(0, 1)^d`.
    pub fn unit_point(&self, i: u64, out: &mut [f64]) {
        let k = (i + 1) as f64;
        for ((o, a), s) in out.iter_mut().zip(&self.alpha).zip(&self.shift) {
            let u = (s + k * a).fract();
            *o = u.clamp(1e-16, 1.0 - 1e-16);
        }
    }

    /// The `i`-th point mapped to a standard normal vector.
    pub fn gaussian_point(&self, i: u64, out: &mut [f64]) {
        let normal = Normal::standard();
        self.unit_point(i, out);
        for o in out.iter_mut() {
            *o = normal.inverse_cdf(*o);
        }
    }
}
