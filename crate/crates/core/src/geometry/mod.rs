//! Points, datasets and the two supported `ℓp` metrics.

mod generate;
mod io;

pub use generate::{generate, Generator};
pub use io::{load, load_binary, load_csv, read_binary, save_binary, save_csv, write_binary, write_csv};

use std::fmt;
use std::ops::Deref;

use crate::{Error, Result};

/// Norm used for all distance computations on a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    L1,
    L2,
}

impl Metric {
    pub fn p(self) -> f64 {
        match self {
            Metric::L1 => 1.0,
            Metric::L2 => 2.0,
        }
    }

    pub fn from_p(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Metric::L1)
        } else if p == 2.0 {
            Ok(Metric::L2)
        } else {
            Err(Error::param(format!("unsupported metric p = {p}; expected 1 or 2")))
        }
    }

    /// Distance without length checks. Callers guarantee `a.len() == b.len()`.
    #[inline]
    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let t = x - y;
                    t * t
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Norm of a single vector.
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            Metric::L1 => v.iter().map(|x| x.abs()).sum(),
            Metric::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::L1 => f.write_str("l1"),
            Metric::L2 => f.write_str("l2"),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" => Ok(Metric::L1),
            "l2" | "2" => Ok(Metric::L2),
            other => Err(Error::param(format!("unknown metric {other:?}"))),
        }
    }
}

/// A point with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_finite(coords: &[f64]) -> Result<()> {
    match coords.iter().position(|c| !c.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// `ℓp` distance between two points of equal length.
pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(metric.dist(a, b))
}

/// An immutable set of `n ≥ 1` points in `ℝ^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    metric: Metric,
    coords: Vec<f64>,
}

impl Dataset {
    pub fn new<P: AsRef<[f64]>>(points: &[P], metric: Metric) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, metric)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, metric: Metric) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dataset dimension must be positive"));
        }
        if coords.is_empty() {
            return Err(Error::param("dataset must contain at least one point"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::format(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        check_finite(&coords)?;
        Ok(Dataset { dim, metric, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; datasets hold at least one point.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn check_query(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: q.len() });
        }
        check_finite(q)
    }

    /// Distance between two dataset points under the dataset metric.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.dist(self.point(i), self.point(j))
    }

    /// Same dataset with every point repeated `times` times (`x_0, x_0, x_1, x_1, ...`).
    pub fn repeated(&self, times: usize) -> Dataset {
        let mut coords = Vec::with_capacity(self.coords.len() * times);
        for p in self.points() {
            for _ in 0..times {
                coords.extend_from_slice(p);
            }
        }
        Dataset { dim: self.dim, metric: self.metric, coords }
    }

    /// Largest pairwise distance, `O(n²)`.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }
}

/// Indices `i` with `dist(x_i, q) ≤ radius`, ascending.
pub fn brute_force_near(ds: &Dataset, q: &[f64], radius: f64) -> Result<Vec<usize>> {
    ds.check_query(q)?;
    let metric = ds.metric();
    Ok(ds
        .points()
        .enumerate()
        .filter(|(_, p)| metric.dist(p, q) <= radius)
        .map(|(i, _)| i)
        .collect())
}

/// `max_i dist(x_i, q)`: the radius of the smallest ball around `q` holding the dataset.
pub fn max_distance(ds: &Dataset, q: &[f64]) -> Result<f64> {
    ds.check_query(q)?;
    let metric = ds.metric();
    Ok(ds.points().map(|p| metric.dist(p, q)).fold(0.0, f64::max))
}
