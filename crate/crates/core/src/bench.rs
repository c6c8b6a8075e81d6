//! Reproducible query benchmarks over one or more plans.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{summation_bound, PlanParams};
use crate::geometry::Dataset;
use crate::index::LshIndex;
use crate::lsh_families::{CollisionModel, UniformLshFamily};
use crate::{Error, Result};

/// Queries at distance exactly `r` (in the dataset metric) from uniformly chosen dataset points,
/// displaced along a uniformly random direction.
pub fn planted_queries(ds: &Dataset, r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let base = ds.point(rng.random_range(0..ds.len()));
            let dir: Vec<f64> = loop {
                let v: Vec<f64> = (0..ds.dim()).map(|_| rng.sample(StandardNormal)).collect();
                if ds.metric().norm(&v) > 0.0 {
                    break v;
                }
            };
            let scale = r / ds.metric().norm(&dir);
            base.iter().zip(&dir).map(|(x, v)| x + scale * v).collect()
        })
        .collect()
}

/// Queries drawn uniformly from the bounding box of the dataset.
pub fn random_queries(ds: &Dataset, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = ds.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in ds.points() {
        for (j, &x) in p.iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..d).map(|j| lo[j] + rng.random::<f64>() * (hi[j] - lo[j])).collect())
        .collect()
}

/// Upper bound on the expected number of far points (beyond `α·r`) sharing a table bucket with
/// any query. Refined plans use the two-band summation bound; classical plans assume all `n`
/// points sit at `α·r`.
pub fn predicted_far_per_round<F: CollisionModel + ?Sized>(plan: &PlanParams, family: &F) -> Result<f64> {
    let p = plan.table_p1();
    match plan.mode.geometry() {
        Some(geometry) => Ok(summation_bound(
            geometry,
            plan.n,
            plan.n_beta,
            plan.beta,
            plan.alpha,
            plan.eta,
            plan.dim,
            p,
            family,
        )?
        .total()),
        None => Ok(plan.n as f64 * p.powf(1.0 / family.rho(plan.alpha)?)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub dataset: String,
    pub mode: String,
    pub alpha: f64,
    pub beta: f64,
    pub k: usize,
    pub l: usize,
    pub queries: usize,
    pub recall: f64,
    pub mean_candidates: f64,
    /// Far entries scanned per executed round.
    pub mean_far_candidates_per_round: f64,
    /// Far entries per table over whole buckets, every table, no early stop.
    pub mean_far_per_table: f64,
    /// Standard error of `mean_far_per_table` over queries.
    pub far_per_table_se: f64,
    pub predicted_bound: f64,
    /// `L·K + mean_candidates`.
    pub total_work: f64,
    pub mean_hash_evals: f64,
    pub mean_rounds: f64,
    pub build_seconds: f64,
    pub query_seconds: f64,
}

pub const BENCH_CSV_HEADER: &str = "dataset,mode,alpha,beta,K,L,queries,recall,mean_candidates,\
mean_far_candidates_per_round,mean_far_per_table,far_per_table_se,predicted_bound,total_work,\
mean_hash_evals,mean_rounds,build_seconds,query_seconds";

/// Number of trailing wall-clock columns in a bench row.
pub const BENCH_WALL_COLUMNS: usize = 2;

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dataset,
            self.mode,
            self.alpha,
            self.beta,
            self.k,
            self.l,
            self.queries,
            self.recall,
            self.mean_candidates,
            self.mean_far_candidates_per_round,
            self.mean_far_per_table,
            self.far_per_table_se,
            self.predicted_bound,
            self.total_work,
            self.mean_hash_evals,
            self.mean_rounds,
            self.build_seconds,
            self.query_seconds
        )
    }
}

pub fn write_bench_csv<W: Write>(records: &[BenchRecord], header: bool, mut w: W) -> Result<()> {
    if header {
        writeln!(w, "{BENCH_CSV_HEADER}")?;
    }
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Drops the wall-clock columns from bench CSV text.
pub fn strip_wall_columns(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            fields[..fields.len().saturating_sub(BENCH_WALL_COLUMNS)].join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

struct QueryOutcome {
    found: bool,
    candidates: u64,
    far: u64,
    rounds: usize,
    hash_evals: u64,
    far_per_table: f64,
}

/// Builds one index per plan (seeded with `seed`) and runs every query against it.
/// Recall counts queries that returned any point within `α·r`. No records for zero queries.
pub fn run_bench(
    data: &Arc<Dataset>,
    dataset_id: &str,
    plans: &[PlanParams],
    family: &UniformLshFamily,
    queries: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<BenchRecord>> {
    if plans.is_empty() {
        return Err(Error::param("bench needs at least one plan"));
    }
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    for q in queries {
        data.check_query(q)?;
    }
    plans
        .iter()
        .map(|plan| {
            let started = Instant::now();
            let index = LshIndex::build(data.clone(), *plan, family.clone(), seed)?;
            let build_seconds = started.elapsed().as_secs_f64();

            let started = Instant::now();
            let outcomes: Vec<QueryOutcome> = queries
                .par_iter()
                .map(|q| {
                    let stats = index.query(q)?;
                    let census = index.bucket_census(q)?;
                    let far_total: usize = census.iter().map(|c| c.1).sum();
                    Ok(QueryOutcome {
                        found: stats.outcome.is_found(),
                        candidates: stats.candidates_examined,
                        far: stats.far_candidates,
                        rounds: stats.rounds_executed,
                        hash_evals: stats.hash_evaluations,
                        far_per_table: far_total as f64 / census.len() as f64,
                    })
                })
                .collect::<Result<_>>()?;
            let query_seconds = started.elapsed().as_secs_f64();

            let count = outcomes.len() as f64;
            let mean = |f: &dyn Fn(&QueryOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / count;
            let rounds: usize = outcomes.iter().map(|o| o.rounds).sum();
            let far: u64 = outcomes.iter().map(|o| o.far).sum();
            let mean_far_per_table = mean(&|o| o.far_per_table);
            let var = if outcomes.len() > 1 {
                outcomes
                    .iter()
                    .map(|o| (o.far_per_table - mean_far_per_table).powi(2))
                    .sum::<f64>()
                    / (count - 1.0)
            } else {
                0.0
            };
            let mean_candidates = mean(&|o| o.candidates as f64);
            Ok(BenchRecord {
                dataset: dataset_id.to_string(),
                mode: plan.mode.to_string(),
                alpha: plan.alpha,
                beta: plan.beta,
                k: plan.k,
                l: plan.l,
                queries: outcomes.len(),
                recall: mean(&|o| o.found as u8 as f64),
                mean_candidates,
                mean_far_candidates_per_round: far as f64 / rounds as f64,
                mean_far_per_table,
                far_per_table_se: (var / count).sqrt(),
                predicted_bound: predicted_far_per_round(plan, family)?,
                total_work: (plan.l * plan.k) as f64 + mean_candidates,
                mean_hash_evals: mean(&|o| o.hash_evals as f64),
                mean_rounds: rounds as f64 / count,
                build_seconds,
                query_seconds,
            })
        })
        .collect()
}
