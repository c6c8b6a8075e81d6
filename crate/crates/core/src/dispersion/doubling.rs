use std::collections::HashSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoublingMethod {
    NetCounting,
    ExactTiny,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingEstimate {
    pub d0: f64,
    pub method: DoublingMethod,
    pub scales_used: usize,
}

/// Points kept by the net estimator; larger datasets are subsampled (seeded).
const MAX_NET_POINTS: usize = 2048;
/// Consecutive scales averaged when reading off the growth rate.
const SMOOTHING_WINDOW: usize = 3;
const MAX_SCALES: usize = 64;

/// Greedy-net estimate of the doubling dimension.
///
/// Nets are built at `ε = diam / 2^k` for `k = 0, 1, …` until every distinct point is its own
/// centre. The estimate is the largest average of `log2(|net_{k+1}| / |net_k|)` over
/// `SMOOTHING_WINDOW` consecutive scales (fewer when the net saturates sooner).
/// The seed fixes the visiting order and, above `MAX_NET_POINTS` points, the subsample.
pub fn estimate_doubling_dim(ds: &Dataset, seed: u64) -> Result<DoublingEstimate> {
    let n = ds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // distinct indices in random order
    let order = sample(&mut rng, n, n.min(MAX_NET_POINTS)).into_vec();

    let distinct = order
        .iter()
        .map(|&i| ds.point(i).iter().map(|c| c.to_bits()).collect::<Vec<u64>>())
        .collect::<HashSet<_>>()
        .len();
    if distinct <= 1 {
        return Ok(DoublingEstimate { d0: 0.0, method: DoublingMethod::NetCounting, scales_used: 0 });
    }

    let mut diam = 0.0f64;
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            diam = diam.max(ds.dist(i, j));
        }
    }

    let mut sizes = Vec::new();
    let mut eps = diam;
    for _ in 0..MAX_SCALES {
        let size = greedy_net_size(ds, &order, eps);
        sizes.push(size);
        if size >= distinct {
            break;
        }
        eps /= 2.0;
    }

    let logs: Vec<f64> = sizes.iter().map(|&s| (s as f64).log2()).collect();
    let steps = logs.len() - 1;
    let window = SMOOTHING_WINDOW.min(steps).max(1);
    let d0 = if steps == 0 {
        0.0
    } else {
        (0..=steps - window)
            .map(|k| (logs[k + window] - logs[k]) / window as f64)
            .fold(0.0, f64::max)
    };
    Ok(DoublingEstimate { d0, method: DoublingMethod::NetCounting, scales_used: sizes.len() })
}

/// Number of centres chosen greedily in `order`: a point becomes a centre when it is farther
/// than `eps` from every existing centre.
fn greedy_net_size(ds: &Dataset, order: &[usize], eps: f64) -> usize {
    let mut centres: Vec<usize> = Vec::new();
    for &i in order {
        let p = ds.point(i);
        if centres.iter().all(|&c| ds.metric().dist(p, ds.point(c)) > eps) {
            centres.push(i);
        }
    }
    centres.len()
}

/// Largest subset size [`exact_doubling_dim`] accepts.
pub const EXACT_MAX_POINTS: usize = 8;

/// Exact doubling dimension of a tiny point set: `max_Y log2 m(Y)`, where `m(Y)` is the fewest
/// subsets of diameter at most `diam(Y)/2` covering `Y`, over all subsets `Y`.
pub fn exact_doubling_dim(ds: &Dataset) -> Result<DoublingEstimate> {
    let n = ds.len();
    if n > EXACT_MAX_POINTS {
        return Err(Error::param(format!(
            "exact doubling dimension limited to {EXACT_MAX_POINTS} points, got {n}"
        )));
    }
    let full = 1usize << n;
    let mut diam = vec![0.0f64; full];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut d = diam[rest];
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            d = d.max(ds.dist(low, j));
            bits &= bits - 1;
        }
        diam[mask] = d;
    }

    let mut worst = 1usize;
    for y in 1..full {
        if (y as u32).count_ones() < 2 {
            continue;
        }
        let half = diam[y] / 2.0;
        // cover[s]: fewest groups of diameter ≤ half partitioning s ⊆ y
        let mut cover = vec![usize::MAX; full];
        cover[0] = 0;
        let mut s = y;
        let mut subsets = Vec::new();
        loop {
            subsets.push(s);
            if s == 0 {
                break;
            }
            s = (s - 1) & y;
        }
        subsets.reverse();
        for &s in &subsets[1..] {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            let mut t = rest;
            loop {
                let group = t | low;
                if diam[group] <= half && cover[s ^ group] != usize::MAX {
                    cover[s] = cover[s].min(cover[s ^ group] + 1);
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & rest;
            }
        }
        worst = worst.max(cover[y]);
    }
    Ok(DoublingEstimate {
        d0: (worst as f64).log2(),
        method: DoublingMethod::ExactTiny,
        scales_used: 0,
    })
}
