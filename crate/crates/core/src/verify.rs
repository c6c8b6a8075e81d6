//! Property suites runnable from the command line.
//!
//! Every suite is deterministic for a given seed and records the first counterexample it meets.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};

use crate::bench::{planted_queries, run_bench, BenchRecord};
use crate::bounds::{
    doubling_packing_lower_bound, optimize_beta, packing_lower_bound, plan_classical, plan_refined,
    summation_bound, Geometry, PlanMode, PlanRequest,
};
use crate::dispersion::{estimate_doubling_dim, pack_graph, profile, verify_packing, Edge};
use crate::geometry::{generate, max_distance, Dataset, Generator, Metric};
use crate::lsh_families::{AnalyticModel, CollisionModel, RhoModel, UniformLshFamily};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Packing,
    Graph,
    Collision,
    Recall,
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Graph, Suite::Packing, Suite::Collision, Suite::Bounds, Suite::Recall];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Packing => "packing",
            Suite::Graph => "graph",
            Suite::Collision => "collision",
            Suite::Recall => "recall",
            Suite::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown suite {s:?}")))
    }
}

/// Suites selected by a name; `all` expands to every suite.
pub fn select(name: &str) -> Result<Vec<Suite>> {
    if name == "all" {
        Ok(Suite::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: u64,
    pub failures: u64,
    pub counterexample: Option<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.to_string(), checks: 0, failures: 0, counterexample: None }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(detail());
            }
        }
    }

    fn absorb(&mut self, other: SuiteReport) {
        self.checks += other.checks;
        self.failures += other.failures;
        if self.counterexample.is_none() {
            self.counterexample = other.counterexample;
        }
    }
}

pub const REPORT_CSV_HEADER: &str = "suite,checks,failures,status,counterexample";

pub fn write_report<W: Write>(reports: &[SuiteReport], mut w: W) -> Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        let example = r.counterexample.as_deref().unwrap_or("").replace('"', "\"\"");
        writeln!(
            w,
            "{},{},{},{},\"{}\"",
            r.name,
            r.checks,
            r.failures,
            if r.passed() { "pass" } else { "fail" },
            example
        )?;
    }
    Ok(())
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(suite.as_str());
    match suite {
        Suite::Graph => report.absorb(graph_suite(1000, seed)?),
        Suite::Packing => {
            report.absorb(packing_bound_oracle(500, 10, seed)?);
            report.absorb(doubling_bound_oracle(100, seed)?);
        }
        Suite::Collision => {
            report.absorb(collision_monte_carlo(1_000_000, seed)?);
            report.absorb(mu_exactness()?);
        }
        Suite::Bounds => report.absorb(bounds_suite(seed)?),
        Suite::Recall => report.absorb(recall_suite(seed)?),
    }
    Ok(report)
}

pub fn run(name: &str, seed: u64) -> Result<Vec<SuiteReport>> {
    select(name)?.into_iter().map(|s| run_suite(s, seed)).collect()
}

fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Random graphs with `n ≤ 200` and densities cycling through `0.01, 0.02, …, 0.5`: the
/// packing conditions, the collapsed-pair budget and `|T|·(n + 2|E|) ≥ n²`, all in integers.
pub fn graph_suite(graphs: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("graph");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in 0..graphs {
        let n = rng.random_range(1..=200);
        let p = 0.01 * ((g % 50) + 1) as f64;
        let edges = erdos_renyi(n, p, &mut rng);
        let packed = pack_graph(n, &edges)?;
        let verdict = verify_packing(&packed, &edges);
        report.check(verdict.is_ok(), || format!("graph {g} (n={n}, p={p}): {}", verdict.unwrap_err()));
        let t = packed.representatives.len() as u128;
        let (nn, e) = (n as u128, edges.len() as u128);
        report.check(t * (nn + 2 * e) >= nn * nn, || {
            format!("graph {g} (n={n}, p={p}): |T|={t}, |E|={e} violates |T|(n+2|E|) >= n^2")
        });
    }
    Ok(report)
}

const PACKING_BETAS: [f64; 8] = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

fn random_small_dataset(rng: &mut ChaCha8Rng, metric: Metric) -> Result<Dataset> {
    let n = rng.random_range(1..=100);
    let d = rng.random_range(1..=5);
    let seed = rng.random();
    let kind = match rng.random_range(0..3) {
        0 => Generator::UniformCube { side: rng.random_range(0.5..10.0) },
        1 => Generator::GaussianClusters { k: rng.random_range(1..5), sigma: rng.random_range(0.05..1.0), spread: 5.0 },
        _ => Generator::Lattice { gap: rng.random_range(0.3..2.0) },
    };
    generate(&kind, n, d, metric, seed)
}

fn random_query(ds: &Dataset, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut lo = vec![f64::INFINITY; ds.dim()];
    let mut hi = vec![f64::NEG_INFINITY; ds.dim()];
    for p in ds.points() {
        for (j, &x) in p.iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    // the box widened by half its extent on each side
    (0..ds.dim())
        .map(|j| {
            let pad = 0.5 * (hi[j] - lo[j]) + 0.1;
            rng.random_range(lo[j] - pad..hi[j] + pad)
        })
        .collect()
}

/// The ambient-dimension packing bound against brute-force farthest distances.
pub fn packing_bound_oracle(datasets: usize, queries: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("packing");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7061_636b);
    for t in 0..datasets {
        let ds = random_small_dataset(&mut rng, Metric::L2)?;
        let r = rng.random_range(0.1..2.0);
        let prof = profile(&ds, r, &PACKING_BETAS)?;
        for _ in 0..queries {
            let q = random_query(&ds, &mut rng);
            let far = max_distance(&ds, &q)?;
            for (beta, n_beta) in prof.iter() {
                let bound = packing_lower_bound(ds.len() as u64, n_beta, beta, r, ds.dim() as f64)?;
                report.check(far >= bound - 1e-9, || {
                    format!(
                        "dataset {t} (n={}, d={}), beta={beta}, r={r}: max distance {far} < bound {bound}",
                        ds.len(),
                        ds.dim()
                    )
                });
            }
        }
    }
    Ok(report)
}

/// Doubling dimension used for curve datasets: the net estimate, raised to at least 2.
pub fn conservative_curve_d0(ds: &Dataset, seed: u64) -> Result<f64> {
    Ok(estimate_doubling_dim(ds, seed)?.d0.max(2.0))
}

/// The doubling packing bound on points along straight and bent curves in `ℝ^d`.
pub fn doubling_bound_oracle(datasets: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("doubling_packing");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6430);
    for t in 0..datasets {
        let n = rng.random_range(2..=100);
        let d = rng.random_range(2..=5);
        let length = rng.random_range(1.0..50.0);
        let bend = if t % 2 == 0 { 0.0 } else { rng.random_range(0.0..0.2) * length };
        let ds = generate(&Generator::Curve { length, bend }, n, d, Metric::L2, rng.random())?;
        let d0 = conservative_curve_d0(&ds, seed)?;
        let r = rng.random_range(0.05..1.0);
        let prof = profile(&ds, r, &PACKING_BETAS)?;
        for _ in 0..10 {
            let q = random_query(&ds, &mut rng);
            let far = max_distance(&ds, &q)?;
            for (beta, n_beta) in prof.iter() {
                let bound = doubling_packing_lower_bound(n as u64, n_beta, beta, r, d0)?;
                report.check(far >= bound - 1e-9, || {
                    format!("curve {t} (n={n}, d={d}, d0={d0}), beta={beta}: max distance {far} < bound {bound}")
                });
            }
        }
    }
    Ok(report)
}

pub const COLLISION_GRID: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];

/// Fraction of `trials` hash draws under which two points at distance `s·r` share a bucket.
/// Only the projection of their difference matters, so one coordinate suffices.
pub fn monte_carlo_collision(family: &UniformLshFamily, s: f64, trials: u64, rng: &mut ChaCha8Rng) -> f64 {
    let c = s * family.r();
    let w = family.width();
    let cauchy = Cauchy::new(0.0, 1.0).expect("unit Cauchy");
    let mut hits = 0u64;
    for _ in 0..trials {
        let a: f64 = match family.metric() {
            Metric::L2 => rng.sample(StandardNormal),
            Metric::L1 => cauchy.sample(rng),
        };
        let b = rng.random::<f64>() * w;
        let shifted = a * c + b;
        if (0.0..w).contains(&shifted) {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Quadrature `p(s)` against Monte-Carlo within 3 binomial standard errors, and strict decrease
/// along the grid, for both families.
pub fn collision_monte_carlo(trials: u64, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("collision");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636f6c);
    for metric in [Metric::L2, Metric::L1] {
        let family = UniformLshFamily::new(metric, 1.0, RhoModel::Tabulated)?;
        let mut previous = f64::INFINITY;
        for s in COLLISION_GRID {
            let p = family.collision_prob(s)?;
            let observed = monte_carlo_collision(&family, s, trials, &mut rng);
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            report.check((observed - p).abs() <= 3.0 * se, || {
                format!("{}: s={s}, quadrature {p}, Monte-Carlo {observed}, se {se}", family.name())
            });
            report.check(p < previous, || format!("{}: p({s}) = {p} not below previous {previous}", family.name()));
            previous = p;
        }
    }
    Ok(report)
}

pub const MU_ALPHAS: [f64; 4] = [1.0, 1.5, 2.0, 4.0];

/// Closed-form `μ` for the analytic models and the residual of the tabulated bisection.
pub fn mu_exactness() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("mu");
    for alpha in MU_ALPHAS {
        let inv = AnalyticModel::new(0.5, RhoModel::InverseS)?.mu_for(alpha)?;
        report.check((inv - 2.0 * alpha).abs() <= 1e-10, || format!("inverse_s alpha={alpha}: mu={inv}"));
        let sq = AnalyticModel::new(0.5, RhoModel::InverseSSquared)?.mu_for(alpha)?;
        report.check((sq - std::f64::consts::SQRT_2 * alpha).abs() <= 1e-10, || {
            format!("inverse_s_squared alpha={alpha}: mu={sq}")
        });
        for metric in [Metric::L2, Metric::L1] {
            let family = UniformLshFamily::new(metric, 1.0, RhoModel::Tabulated)?;
            let mu = family.mu_for(alpha)?;
            let residual = (family.rho(mu)? - family.rho(alpha)? / 2.0).abs();
            report.check(residual <= 1e-9, || {
                format!("tabulated {} alpha={alpha}: mu={mu}, residual {residual}", family.name())
            });
        }
    }
    Ok(report)
}

/// Planner identities: the large-β limit, monotonicity in β and `N_β`, and the summation-bound
/// bracket at the planner's own `p(1)^K`.
pub fn bounds_suite(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("bounds");
    report.absorb(limit_consistency(&[1_000, 10_000])?);
    let family = AnalyticModel::new(0.5, RhoModel::InverseS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x626f);
    for _ in 0..1000 {
        let n: u64 = rng.random_range(2..100_000);
        let full = n * (n - 1) / 2;
        let n_beta = (rng.random::<f64>() * full as f64) as u64;
        let denser = n_beta + (rng.random::<f64>() * (full - n_beta) as f64) as u64;
        let dim = rng.random_range(1.0..20.0);
        let alpha = rng.random_range(1.0..5.0);
        let beta = rng.random_range(0.1..50.0);
        let wider = beta + rng.random_range(0.0..50.0);
        let req = PlanRequest { n, n_beta, dim, alpha, beta, r: 1.0, delta: 0.1 };
        let base = plan_refined(&req, &family)?;
        let w = plan_refined(&PlanRequest { beta: wider, ..req }, &family)?;
        let d = plan_refined(&PlanRequest { n_beta: denser, ..req }, &family)?;
        report.check(w.predicted_cost <= base.predicted_cost * (1.0 + 1e-12), || {
            format!("{req:?}: cost rose from {} to {} when beta grew to {wider}", base.predicted_cost, w.predicted_cost)
        });
        report.check(d.predicted_cost >= base.predicted_cost * (1.0 - 1e-12), || {
            format!("{req:?}: cost fell to {} when N_beta grew to {denser}", d.predicted_cost)
        });
        let s = summation_bound(Geometry::Dimension, n, n_beta, beta, alpha, base.eta, dim, base.table_p1(), &family)?;
        report.check(s.total() >= s.term2 && s.total() <= 2.0 * s.term1.max(s.term2), || {
            format!("{req:?}: summation bound {s:?} outside its bracket")
        });
    }
    Ok(report)
}

/// `β = 10⁹` with every pair near reproduces the classical cost within 1%.
pub fn limit_consistency(sizes: &[u64]) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("limit");
    let family = AnalyticModel::new(0.5, RhoModel::InverseS)?;
    for &n in sizes {
        let req = PlanRequest { n, n_beta: n * (n - 1) / 2, dim: 16.0, alpha: 2.0, beta: 1e9, r: 1.0, delta: 0.1 };
        let refined = plan_refined(&req, &family)?;
        let classical = plan_classical(&req, &family)?;
        let ratio = refined.predicted_cost / classical.predicted_cost;
        report.check((ratio - 1.0).abs() <= 0.01, || format!("n={n}: refined/classical cost ratio {ratio}"));
    }
    Ok(report)
}

/// Benchmarks the profile-optimised refined plan and the classical plan on planted queries.
#[allow(clippy::too_many_arguments)]
pub fn paired_plans(
    data: &Arc<Dataset>,
    dataset_id: &str,
    family: &UniformLshFamily,
    betas: &[f64],
    alpha: f64,
    delta: f64,
    queries: usize,
    seed: u64,
) -> Result<Vec<BenchRecord>> {
    let r = family.r();
    let prof = profile(data, r, betas)?;
    let refined = optimize_beta(&prof, data.dim() as f64, alpha, delta, family, PlanMode::RefinedDim)?;
    let classical = optimize_beta(&prof, data.dim() as f64, alpha, delta, family, PlanMode::Classical)?;
    let qs = planted_queries(data, r, queries, seed);
    run_bench(data, dataset_id, &[refined, classical], family, &qs, seed)
}

/// Lower edge of the recall acceptance band: `1 − δ − 3·√(δ(1−δ)/q)`.
pub fn recall_floor(delta: f64, queries: usize) -> f64 {
    1.0 - delta - 3.0 * (delta * (1.0 - delta) / queries as f64).sqrt()
}

/// Planted-query recall for refined and classical plans, and mean far bucket entries per table
/// against the plan's candidate bound.
pub fn recall_suite(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("recall");
    let (alpha, delta, queries) = (2.0, 0.1, 500);
    let family = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::Tabulated)?;
    let betas: Vec<f64> = (1..=16).map(|i| 0.25 * i as f64).collect();
    let fixtures = [
        ("uniform_cube", generate(&Generator::UniformCube { side: 10.0 }, 2000, 4, Metric::L2, seed)?),
        ("lattice", generate(&Generator::Lattice { gap: 2.0 }, 2025, 2, Metric::L2, seed)?),
    ];
    for (id, ds) in fixtures {
        let data = Arc::new(ds);
        for rec in paired_plans(&data, id, &family, &betas, alpha, delta, queries, seed)? {
            let floor = recall_floor(delta, queries);
            report.check(rec.recall >= floor, || {
                format!("{id} {}: recall {} below {floor}", rec.mode, rec.recall)
            });
            let limit = rec.predicted_bound + 3.0 * rec.far_per_table_se;
            report.check(rec.mean_far_per_table <= limit, || {
                format!("{id} {}: mean far per table {} above bound {limit}", rec.mode, rec.mean_far_per_table)
            });
        }
    }
    Ok(report)
}
