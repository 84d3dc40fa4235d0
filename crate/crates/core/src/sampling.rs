//! Seeded samplers for point pairs and triples.
//!
//! Samples are drawn sequentially from a ChaCha stream so they do not depend
//! on how later evaluation is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, dim);
        let n = crate::geometry::norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

pub fn uniform_box<R: Rng>(rng: &mut R, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-half_width..=half_width)).collect()
}

fn log_uniform<R: Rng>(rng: &mut R, log10_range: (f64, f64)) -> f64 {
    10f64.powf(rng.random_range(log10_range.0..=log10_range.1))
}

/// Pairs with log-uniform separations, uniform directions and base points in
/// a cube. `crossing` extra pairs straddle the hyperplane `x_last = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub seed: u64,
    pub pairs: usize,
    pub crossing: usize,
    pub log10_separation: (f64, f64),
    pub box_half_width: f64,
}

impl Default for PairSampler {
    fn default() -> Self {
        PairSampler { seed: 0, pairs: 10_000, crossing: 0, log10_separation: (-3.0, 3.0), box_half_width: 10.0 }
    }
}

impl PairSampler {
    pub fn total(&self) -> usize {
        self.pairs + self.crossing
    }

    pub fn sample(&self, dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut rng = rng(self.seed);
        let mut out = Vec::with_capacity(self.total());
        for _ in 0..self.pairs {
            let a = uniform_box(&mut rng, dim, self.box_half_width);
            let u = unit_vector(&mut rng, dim);
            let r = log_uniform(&mut rng, self.log10_separation);
            let b = a.iter().zip(&u).map(|(ai, ui)| ai + r * ui).collect();
            out.push((a, b));
        }
        for _ in 0..self.crossing {
            let mut c = uniform_box(&mut rng, dim, self.box_half_width);
            c[dim - 1] = 0.0;
            let mut u = unit_vector(&mut rng, dim);
            if u[dim - 1] < 0.0 {
                u.iter_mut().for_each(|v| *v = -*v);
            }
            if u[dim - 1] < 1e-6 {
                u[dim - 1] = 1e-6;
            }
            let r = log_uniform(&mut rng, self.log10_separation);
            let split: f64 = rng.random_range(0.05..0.95);
            let a: Vec<f64> = c.iter().zip(&u).map(|(ci, ui)| ci + split * r * ui).collect();
            let b: Vec<f64> = c.iter().zip(&u).map(|(ci, ui)| ci - (1.0 - split) * r * ui).collect();
            out.push((a, b));
        }
        out
    }
}

/// Triples `(x, y, z)` with `|y - z|` and the ratio `|x - z| / |y - z|` both
/// log-uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleSampler {
    pub seed: u64,
    pub triples: usize,
    pub log10_ratio: (f64, f64),
    pub log10_scale: (f64, f64),
    pub box_half_width: f64,
}

impl Default for TripleSampler {
    fn default() -> Self {
        TripleSampler {
            seed: 0,
            triples: 10_000,
            log10_ratio: (-2.0, 2.0),
            log10_scale: (-2.0, 1.0),
            box_half_width: 10.0,
        }
    }
}

impl TripleSampler {
    pub fn sample(&self, dim: usize) -> Vec<[Vec<f64>; 3]> {
        let mut rng = rng(self.seed);
        (0..self.triples)
            .map(|_| {
                let z = uniform_box(&mut rng, dim, self.box_half_width);
                let ry = log_uniform(&mut rng, self.log10_scale);
                let s = log_uniform(&mut rng, self.log10_ratio);
                let uy = unit_vector(&mut rng, dim);
                let ux = unit_vector(&mut rng, dim);
                let y = z.iter().zip(&uy).map(|(zi, u)| zi + ry * u).collect();
                let x = z.iter().zip(&ux).map(|(zi, u)| zi + s * ry * u).collect();
                [x, y, z]
            })
            .collect()
    }
}

/// Two `(x, t)` points of the upper half-space.
pub type HalfSpacePair = ((Vec<f64>, f64), (Vec<f64>, f64));

/// Pairs of upper half-space points: bases uniform in a cube, heights log-uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePairSampler {
    pub seed: u64,
    pub pairs: usize,
    pub base_half_width: f64,
    pub height_range: (f64, f64),
}

impl Default for HalfSpacePairSampler {
    fn default() -> Self {
        HalfSpacePairSampler { seed: 0, pairs: 1000, base_half_width: 2.0, height_range: (0.1, 10.0) }
    }
}

impl HalfSpacePairSampler {
    /// Each entry is `(x, t)` twice; coincident pairs are never emitted.
    pub fn sample(&self, dim: usize) -> Vec<HalfSpacePair> {
        let mut rng = rng(self.seed);
        let logs = (self.height_range.0.log10(), self.height_range.1.log10());
        let mut out = Vec::with_capacity(self.pairs);
        while out.len() < self.pairs {
            let p = (uniform_box(&mut rng, dim, self.base_half_width), log_uniform(&mut rng, logs));
            let q = (uniform_box(&mut rng, dim, self.base_half_width), log_uniform(&mut rng, logs));
            if p != q {
                out.push((p, q));
            }
        }
        out
    }
}
