use std::io::Write;

use super::pairs::{check_radius, fold_near_pairs};
use crate::geometry::Dataset;
use crate::{Error, Result};

/// `N_β` sampled on an ascending `β` grid at a fixed base radius `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionProfile {
    r: f64,
    betas: Vec<f64>,
    counts: Vec<u64>,
    n: usize,
}

impl DispersionProfile {
    /// Checks every profile invariant: strictly ascending positive `β`, nondecreasing counts,
    /// each count at most `n(n−1)/2`.
    pub fn new(r: f64, betas: Vec<f64>, counts: Vec<u64>, n: usize) -> Result<Self> {
        validate_grid(r, &betas)?;
        if counts.len() != betas.len() {
            return Err(Error::InconsistentInputs(format!(
                "{} betas but {} counts",
                betas.len(),
                counts.len()
            )));
        }
        if n == 0 {
            return Err(Error::param("profile needs n ≥ 1"));
        }
        let max_pairs = max_pairs(n);
        if counts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InconsistentInputs("counts must be nondecreasing in beta".into()));
        }
        if let Some(&c) = counts.iter().find(|&&c| c > max_pairs) {
            return Err(Error::InconsistentInputs(format!("count {c} exceeds n(n-1)/2 = {max_pairs}")));
        }
        Ok(DispersionProfile { r, betas, counts, n })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.betas.iter().copied().zip(self.counts.iter().copied())
    }

    pub fn c_epsilon(&self, eps: f64) -> CEpsilon {
        c_epsilon(self, eps)
    }

    /// CSV with header `beta,n_beta,n,r`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "beta,n_beta,n,r")?;
        for (beta, count) in self.iter() {
            writeln!(w, "{beta},{count},{},{}", self.n, self.r)?;
        }
        Ok(())
    }
}

pub(crate) fn max_pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

fn validate_grid(r: f64, betas: &[f64]) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::param("beta grid is empty"));
    }
    for &b in betas {
        check_radius(b, r)?;
    }
    if betas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("beta grid must be strictly ascending"));
    }
    Ok(())
}

/// Computes `N_β` at every grid point in one pass over near pairs.
pub fn profile(ds: &Dataset, r: f64, betas: &[f64]) -> Result<DispersionProfile> {
    validate_grid(r, betas)?;
    // same products as count_near_pairs, so each entry matches it exactly
    let thresholds: Vec<f64> = betas.iter().map(|b| b * r).collect();
    let widest = *thresholds.last().expect("nonempty grid");
    let histogram = fold_near_pairs(
        ds,
        widest,
        vec![0u64; thresholds.len()],
        |hist: &mut Vec<u64>, _, _, d| {
            let slot = thresholds.partition_point(|&t| t < d);
            hist[slot] += 1;
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    let counts = histogram
        .iter()
        .scan(0u64, |acc, &h| {
            *acc += h;
            Some(*acc)
        })
        .collect();
    DispersionProfile::new(r, betas.to_vec(), counts, ds.len())
}

/// `C_ε(n) = sup{β : N_β < n^{1+ε}}` restricted to the profiled grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CEpsilon {
    /// Largest profiled `β` whose count is below the threshold.
    Finite(f64),
    /// Every profiled `β` qualifies; the supremum lies beyond the grid.
    Unbounded,
    /// Even the smallest profiled `β` reaches the threshold.
    NoQualifyingBeta,
}

impl CEpsilon {
    /// Numeric value, with `Unbounded` as `+∞` and `NoQualifyingBeta` as `None`.
    pub fn value(self) -> Option<f64> {
        match self {
            CEpsilon::Finite(b) => Some(b),
            CEpsilon::Unbounded => Some(f64::INFINITY),
            CEpsilon::NoQualifyingBeta => None,
        }
    }
}

pub fn c_epsilon(p: &DispersionProfile, eps: f64) -> CEpsilon {
    c_epsilon_from_counts(&p.betas, &p.counts, p.n, eps)
}

/// [`c_epsilon`] over raw grid data. Counts are taken as given; the first run of
/// qualifying entries determines the answer.
pub fn c_epsilon_from_counts(betas: &[f64], counts: &[u64], n: usize, eps: f64) -> CEpsilon {
    let threshold = (n as f64).powf(1.0 + eps);
    let qualifying = counts.iter().take_while(|&&c| (c as f64) < threshold).count();
    if qualifying == 0 {
        CEpsilon::NoQualifyingBeta
    } else if qualifying == counts.len() {
        CEpsilon::Unbounded
    } else {
        CEpsilon::Finite(betas[qualifying - 1])
    }
}
