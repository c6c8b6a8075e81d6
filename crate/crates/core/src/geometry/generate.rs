use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Dataset, Metric};
use crate::{Error, Result};

/// Synthetic dataset families.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// i.i.d. uniform in `[0, side)^d`.
    UniformCube { side: f64 },
    /// The first `n` points of the integer grid scaled by `gap`, row-major.
    /// Pairwise distances are at least `gap` under both metrics.
    Lattice { gap: f64 },
    /// `k` centres uniform in `[0, spread)^d`; point `i` is centre `i mod k` plus `N(0, sigma²)` noise.
    GaussianClusters { k: usize, sigma: f64, spread: f64 },
    /// Each coordinate is nonzero with probability `density`, nonzero values `N(0, 1)`.
    Sparse { density: f64 },
    /// Points at uniform parameters `t ∈ [0, length)` on the curve
    /// `t·u + bend·sin(π t / length)·v` for random orthonormal `u, v`.
    /// `bend = 0` gives a straight segment.
    Curve { length: f64, bend: f64 },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::UniformCube { .. } => "uniform_cube",
            Generator::Lattice { .. } => "lattice",
            Generator::GaussianClusters { .. } => "gaussian_clusters",
            Generator::Sparse { .. } => "sparse",
            Generator::Curve { .. } => "curve",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Generator::UniformCube { side } => side > 0.0 && side.is_finite(),
            Generator::Lattice { gap } => gap > 0.0 && gap.is_finite(),
            Generator::GaussianClusters { k, sigma, spread } => {
                k >= 1 && sigma >= 0.0 && sigma.is_finite() && spread >= 0.0 && spread.is_finite()
            }
            Generator::Sparse { density } => density > 0.0 && density <= 1.0,
            Generator::Curve { length, bend } => {
                length > 0.0 && length.is_finite() && bend.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid generator parameters: {self:?}")))
        }
    }
}

/// Generates `n` points in `ℝ^d`. Deterministic for a fixed seed.
pub fn generate(kind: &Generator, n: usize, d: usize, metric: Metric, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::param(format!("n and d must be positive (n = {n}, d = {d})")));
    }
    kind.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n * d);

    match *kind {
        Generator::UniformCube { side } => {
            coords.extend((0..n * d).map(|_| rng.random::<f64>() * side));
        }
        Generator::Lattice { gap } => {
            let side = grid_side(n, d);
            let mut digits = vec![0usize; d];
            for _ in 0..n {
                coords.extend(digits.iter().map(|&k| k as f64 * gap));
                // odometer increment, last coordinate fastest
                for slot in digits.iter_mut().rev() {
                    *slot += 1;
                    if *slot < side {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
        Generator::GaussianClusters { k, sigma, spread } => {
            let centres: Vec<f64> = (0..k * d).map(|_| rng.random::<f64>() * spread).collect();
            for i in 0..n {
                let c = &centres[(i % k) * d..(i % k + 1) * d];
                for &cj in c {
                    let noise = if sigma > 0.0 {
                        sigma * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    };
                    coords.push(cj + noise);
                }
            }
        }
        Generator::Sparse { density } => {
            for _ in 0..n * d {
                let v = if rng.random::<f64>() < density {
                    rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                coords.push(v);
            }
        }
        Generator::Curve { length, bend } => {
            let u = random_unit(&mut rng, d);
            let v = if d > 1 { orthonormal_to(&mut rng, &u) } else { vec![0.0; d] };
            for _ in 0..n {
                let t = rng.random::<f64>() * length;
                let lift = bend * (std::f64::consts::PI * t / length).sin();
                coords.extend(u.iter().zip(&v).map(|(a, b)| t * a + lift * b));
            }
        }
    }
    Dataset::from_flat(d, coords, metric)
}

/// Smallest `m` with `m^d ≥ n`.
fn grid_side(n: usize, d: usize) -> usize {
    let mut m = (n as f64).powf(1.0 / d as f64).floor().max(1.0) as usize;
    while (m as u128).checked_pow(d as u32).is_some_and(|p| p < n as u128) {
        m += 1;
    }
    m
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn orthonormal_to(rng: &mut ChaCha8Rng, u: &[f64]) -> Vec<f64> {
    loop {
        let mut v = random_unit(rng, u.len());
        let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
