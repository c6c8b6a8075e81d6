//! Uniform p-stable line-projection families.
//!
//! A hash is `h(x) = ⌊(⟨a, x⟩ + b) / w⌋` with `a` drawn i.i.d. from the 2-stable (Gaussian,
//! for `ℓ2`) or 1-stable (Cauchy, for `ℓ1`) law and `b` uniform on `[0, w)`. For two points at
//! distance `c` the projected gap is `c·|X|` with `X` stable, so the collision probability is
//!
//! ```text
//! p(c) = ∫_0^w (1/c) f_|X|(t/c) (1 − t/w) dt
//! ```
//!
//! which is evaluated by adaptive quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, StandardNormal};

use crate::geometry::Metric;
use crate::quadrature::integrate;
use crate::{Error, Result};

/// Target collision probability at distance `r` for the calibrated default width.
pub const DEFAULT_P1: f64 = 0.5;
const QUADRATURE_REL_TOL: f64 = 1e-12;
const MU_TOLERANCE: f64 = 1e-12;

/// How the planner turns a distance ratio into `ρ(s) = ln p(1) / ln p(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhoModel {
    /// `ρ(s) = 1/s` (line projection).
    InverseS,
    /// `ρ(s) = 1/s²` (ball-grid hashing, analytic only).
    InverseSSquared,
    /// `ρ(s)` from the quadrature collision curve.
    Tabulated,
}

impl RhoModel {
    pub fn as_str(self) -> &'static str {
        match self {
            RhoModel::InverseS => "inverse_s",
            RhoModel::InverseSSquared => "inverse_s_squared",
            RhoModel::Tabulated => "tabulated",
        }
    }
}

impl fmt::Display for RhoModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RhoModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse_s" => Ok(RhoModel::InverseS),
            "inverse_s_squared" => Ok(RhoModel::InverseSSquared),
            "tabulated" => Ok(RhoModel::Tabulated),
            other => Err(Error::param(format!("unknown rho model {other:?}"))),
        }
    }
}

fn check_ratio(s: f64) -> Result<()> {
    if s >= 1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("distance ratio must be ≥ 1, got {s}")))
    }
}

fn analytic_rho(model: RhoModel, s: f64) -> f64 {
    match model {
        RhoModel::InverseS => 1.0 / s,
        RhoModel::InverseSSquared => 1.0 / (s * s),
        RhoModel::Tabulated => unreachable!("tabulated rho has no closed form"),
    }
}

fn analytic_mu(model: RhoModel, alpha: f64) -> f64 {
    match model {
        RhoModel::InverseS => 2.0 * alpha,
        RhoModel::InverseSSquared => std::f64::consts::SQRT_2 * alpha,
        RhoModel::Tabulated => unreachable!("tabulated rho has no closed form"),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must be ≥ 1, got {alpha}")))
    }
}

/// What the planner needs from a family: `p(1)` and the `ρ` curve.
pub trait CollisionModel {
    /// Collision probability at distance exactly `r`.
    fn p1(&self) -> f64;

    fn rho_model(&self) -> RhoModel;

    /// `ρ(s)` for `s ≥ 1` under [`CollisionModel::rho_model`].
    fn rho(&self, s: f64) -> Result<f64>;

    /// Solves `ρ(μ) = ρ(α)/2`.
    fn mu_for(&self, alpha: f64) -> Result<f64>;
}

/// A planning-only model: a known `p(1)` with an analytic `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticModel {
    p1: f64,
    model: RhoModel,
}

impl AnalyticModel {
    pub fn new(p1: f64, model: RhoModel) -> Result<Self> {
        if !(p1 > 0.0 && p1 < 1.0) {
            return Err(Error::param(format!("p(1) must lie in (0, 1), got {p1}")));
        }
        if model == RhoModel::Tabulated {
            return Err(Error::param("an analytic model needs inverse_s or inverse_s_squared"));
        }
        Ok(AnalyticModel { p1, model })
    }
}

impl CollisionModel for AnalyticModel {
    fn p1(&self) -> f64 {
        self.p1
    }

    fn rho_model(&self) -> RhoModel {
        self.model
    }

    fn rho(&self, s: f64) -> Result<f64> {
        check_ratio(s)?;
        Ok(analytic_rho(self.model, s))
    }

    fn mu_for(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(analytic_mu(self.model, alpha))
    }
}

/// A p-stable line-projection family at base radius `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformLshFamily {
    metric: Metric,
    width: f64,
    r: f64,
    rho_model: RhoModel,
    p1: f64,
}

impl UniformLshFamily {
    /// Family with its bucket width calibrated so that `p(1) = DEFAULT_P1`.
    pub fn new(metric: Metric, r: f64, rho_model: RhoModel) -> Result<Self> {
        check_positive("r", r)?;
        let width = calibrate_width(metric, r, DEFAULT_P1);
        Self::with_width(metric, r, width, rho_model)
    }

    pub fn with_width(metric: Metric, r: f64, width: f64, rho_model: RhoModel) -> Result<Self> {
        check_positive("r", r)?;
        check_positive("bucket width", width)?;
        let p1 = collision_at_distance(metric, width, r);
        Ok(UniformLshFamily { metric, width, r, rho_model, p1 })
    }

    pub fn name(&self) -> &'static str {
        match self.metric {
            Metric::L2 => "gaussian",
            Metric::L1 => "cauchy",
        }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn with_rho_model(mut self, rho_model: RhoModel) -> Self {
        self.rho_model = rho_model;
        self
    }

    /// `p(s)`: collision probability for a pair at distance `s·r`.
    pub fn collision_prob(&self, s: f64) -> Result<f64> {
        check_positive("s", s)?;
        Ok(collision_at_distance(self.metric, self.width, s * self.r))
    }

    /// `ln p(1) / ln p(s)` from the quadrature curve, whatever the planning model.
    pub fn measured_rho(&self, s: f64) -> Result<f64> {
        check_ratio(s)?;
        if s == 1.0 {
            return Ok(1.0);
        }
        Ok(self.p1.ln() / self.collision_prob(s)?.ln())
    }

    /// Serialised descriptor `name=..;p=..;w=..;r=..;rho_model=..`.
    pub fn to_record(&self) -> String {
        format!(
            "name={};p={};w={};r={};rho_model={}",
            self.name(),
            self.metric.p(),
            self.width,
            self.r,
            self.rho_model
        )
    }

    pub fn from_record(record: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for part in record.split(';') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::format(format!("malformed family field {part:?}")))?;
            fields.insert(k.trim(), v.trim());
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::format(format!("family record lacks {k:?}")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::format(format!("family field {k:?} is not a number")))
        };
        let metric = Metric::from_p(num("p")?).map_err(|e| Error::format(e.to_string()))?;
        let family = Self::with_width(metric, num("r")?, num("w")?, get("rho_model")?.parse()?)?;
        if get("name")? != family.name() {
            return Err(Error::format(format!(
                "family name {:?} does not match metric {}",
                get("name")?,
                metric
            )));
        }
        Ok(family)
    }
}

impl CollisionModel for UniformLshFamily {
    fn p1(&self) -> f64 {
        self.p1
    }

    fn rho_model(&self) -> RhoModel {
        self.rho_model
    }

    fn rho(&self, s: f64) -> Result<f64> {
        check_ratio(s)?;
        match self.rho_model {
            RhoModel::Tabulated => self.measured_rho(s),
            model => Ok(analytic_rho(model, s)),
        }
    }

    fn mu_for(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        if self.rho_model != RhoModel::Tabulated {
            return Ok(analytic_mu(self.rho_model, alpha));
        }
        let target = 0.5 * self.measured_rho(alpha)?;
        let mut lo = alpha;
        let mut hi = 2.0 * alpha;
        while self.measured_rho(hi)? > target {
            lo = hi;
            hi *= 2.0;
            if hi > 1e9 {
                return Err(Error::NonInvertible(format!(
                    "rho stays above {target} up to s = {hi:e} (alpha = {alpha})"
                )));
            }
        }
        while hi - lo > MU_TOLERANCE * hi {
            let mid = 0.5 * (lo + hi);
            if self.measured_rho(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{what} must be positive and finite, got {v}")))
    }
}

/// Density of `|X|` for the stable law matching `metric`.
fn abs_stable_density(metric: Metric, x: f64) -> f64 {
    match metric {
        Metric::L2 => (2.0 / PI).sqrt() * (-0.5 * x * x).exp(),
        Metric::L1 => 2.0 / (PI * (1.0 + x * x)),
    }
}

fn collision_at_distance(metric: Metric, width: f64, c: f64) -> f64 {
    // in units of c the integrand is f(u)(1 − cu/w) on [0, w/c]; pieces [0,1], [1,2], [2,4], …
    // keep both the peak at 0 and heavy tails resolved when w/c is large
    let end = width / c;
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = end.min(1.0);
    loop {
        total += integrate(
            |u| abs_stable_density(metric, u) * (1.0 - u / end),
            a,
            b,
            QUADRATURE_REL_TOL,
        );
        if b >= end {
            return total;
        }
        a = b;
        b = (2.0 * b).min(end);
    }
}

/// Width `w` with `p(1) = target`; `p(1)` increases with `w`.
fn calibrate_width(metric: Metric, r: f64, target: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = r;
    while collision_at_distance(metric, hi, r) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if collision_at_distance(metric, mid, r) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// One line-projection hash `⌊(⟨a, x⟩ + b) / w⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct HashFunction {
    pub projection: Vec<f64>,
    pub offset: f64,
    pub width: f64,
}

impl HashFunction {
    pub fn dim(&self) -> usize {
        self.projection.len()
    }

    /// Bucket of `x`; `x` must have the projection's length.
    #[inline]
    pub fn bucket(&self, x: &[f64]) -> i64 {
        debug_assert_eq!(x.len(), self.projection.len());
        let dot: f64 = self.projection.iter().zip(x).map(|(a, b)| a * b).sum();
        ((dot + self.offset) / self.width).floor() as i64
    }
}

/// Samples one hash for `dim`-dimensional inputs from `rng`.
pub fn sample_hash_with<R: Rng + ?Sized>(f: &UniformLshFamily, dim: usize, rng: &mut R) -> HashFunction {
    let projection = match f.metric {
        Metric::L2 => (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        Metric::L1 => {
            let cauchy = Cauchy::new(0.0, 1.0).expect("unit Cauchy");
            (0..dim).map(|_| rng.sample(cauchy)).collect()
        }
    };
    let offset = rng.random::<f64>() * f.width;
    HashFunction { projection, offset, width: f.width }
}

/// Deterministic per-seed hash sample.
pub fn sample_hash(f: &UniformLshFamily, dim: usize, seed: u64) -> HashFunction {
    sample_hash_with(f, dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn eval_hash(h: &HashFunction, x: &[f64]) -> Result<i64> {
    if x.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: x.len() });
    }
    Ok(h.bucket(x))
}

/// `g = (h_1, …, h_K)`; two points share a bucket when all `K` parts agree.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatenatedHash {
    pub parts: Vec<HashFunction>,
}

impl ConcatenatedHash {
    pub fn new(parts: Vec<HashFunction>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::param("a concatenated hash needs K ≥ 1 parts"));
        }
        Ok(ConcatenatedHash { parts })
    }

    pub fn sample_with<R: Rng + ?Sized>(f: &UniformLshFamily, dim: usize, k: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..k).map(|_| sample_hash_with(f, dim, rng)).collect())
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// Writes the `K` bucket indices of `x` into `key`.
    pub fn key_into(&self, x: &[f64], key: &mut Vec<i64>) {
        key.clear();
        key.extend(self.parts.iter().map(|h| h.bucket(x)));
    }

    pub fn key(&self, x: &[f64]) -> Vec<i64> {
        let mut key = Vec::with_capacity(self.k());
        self.key_into(x, &mut key);
        key
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_cdf(x: f64) -> f64 {
        // Φ via erfc; erfc from the complementary series is accurate enough at the
        // 1e-10 level for the arguments used here (|x| ≤ 10)
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }

    fn erfc(x: f64) -> f64 {
        if x < 0.0 {
            return 2.0 - erfc(-x);
        }
        // continued fraction (Lentz) for large x, Taylor series of erf for small x
        if x < 3.0 {
            let mut sum = x;
            let mut term = x;
            let mut k = 0.0;
            loop {
                k += 1.0;
                term *= -x * x / k;
                let add = term / (2.0 * k + 1.0);
                sum += add;
                if add.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            1.0 - 2.0 / PI.sqrt() * sum
        } else {
            let mut f = 0.0;
            for k in (1..200).rev() {
                f = (k as f64 / 2.0) / (x + f);
            }
            (-x * x).exp() / PI.sqrt() / (x + f)
        }
    }

    /// Closed form for the Gaussian family, with `x = w/c`.
    fn gaussian_closed(c: f64, w: f64) -> f64 {
        let x = w / c;
        1.0 - 2.0 * normal_cdf(-x) - 2.0 / ((2.0 * PI).sqrt() * x) * (1.0 - (-x * x / 2.0).exp())
    }

    /// Closed form for the Cauchy family, with `x = w/c`.
    fn cauchy_closed(c: f64, w: f64) -> f64 {
        let x = w / c;
        2.0 * x.atan() / PI - (1.0 + x * x).ln() / (PI * x)
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for &w in &[0.3, 1.0, 1.4704, 4.0, 25.0] {
            for &c in &[0.1, 0.5, 1.0, 2.0, 3.0, 8.0, 40.0] {
                let g = collision_at_distance(Metric::L2, w, c);
                let cy = collision_at_distance(Metric::L1, w, c);
                assert!((g / gaussian_closed(c, w) - 1.0).abs() < 1e-8, "gauss w={w} c={c}");
                assert!((cy / cauchy_closed(c, w) - 1.0).abs() < 1e-8, "cauchy w={w} c={c}");
            }
        }
    }

    #[test]
    fn calibrated_width_hits_target() {
        for metric in [Metric::L1, Metric::L2] {
            for r in [0.5, 1.0, 3.0] {
                let f = UniformLshFamily::new(metric, r, RhoModel::InverseS).unwrap();
                assert!((f.p1() - DEFAULT_P1).abs() < 1e-10);
                assert!((0.4..=0.6).contains(&f.collision_prob(1.0).unwrap()));
            }
        }
        // width scales with r
        let a = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS).unwrap();
        let b = UniformLshFamily::new(Metric::L2, 2.0, RhoModel::InverseS).unwrap();
        assert!((b.width() / a.width() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn collision_curve_strictly_decreasing() {
        for metric in [Metric::L1, Metric::L2] {
            let f = UniformLshFamily::new(metric, 1.0, RhoModel::Tabulated).unwrap();
            let grid: Vec<f64> = (0..=14).map(|i| 1.0 + 0.5 * i as f64).collect();
            let ps: Vec<f64> = grid.iter().map(|&s| f.collision_prob(s).unwrap()).collect();
            assert!(ps.windows(2).all(|w| w[1] < w[0]), "{metric}: {ps:?}");
            assert!(ps.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn wide_buckets_always_collide() {
        let f = UniformLshFamily::with_width(Metric::L2, 1.0, 1e6, RhoModel::InverseS).unwrap();
        assert!(f.collision_prob(2.0).unwrap() > 0.9999);
        assert!(f.collision_prob(0.0).is_err());
    }

    #[test]
    fn rho_models() {
        let f = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS).unwrap();
        assert_eq!(f.rho(1.0).unwrap(), 1.0);
        assert_eq!(f.rho(2.0).unwrap(), 0.5);
        let f2 = f.clone().with_rho_model(RhoModel::InverseSSquared);
        assert_eq!(f2.rho(2.0).unwrap(), 0.25);
        let ft = f.clone().with_rho_model(RhoModel::Tabulated);
        assert_eq!(ft.rho(1.0).unwrap(), 1.0);
        assert!(f.rho(0.5).is_err());
    }

    #[test]
    fn measured_rho_nonincreasing() {
        for metric in [Metric::L1, Metric::L2] {
            let f = UniformLshFamily::new(metric, 1.0, RhoModel::Tabulated).unwrap();
            let mut prev = 1.0;
            for i in 1..40 {
                let rho = f.rho(1.0 + 0.25 * i as f64).unwrap();
                assert!(rho <= prev && rho > 0.0);
                prev = rho;
            }
        }
    }

    /// The measured ρ of the Gaussian family sits above 1/s; the gap is widest for narrow
    /// buckets. At the calibrated width (p(1) = 0.5) it peaks near 0.109 on [1, 4]; it only
    /// drops to about 0.05 once the width grows to roughly 3r (p(1) ≈ 0.73).
    #[test]
    fn gaussian_rho_gap_to_inverse_s() {
        let gap = |f: &UniformLshFamily| {
            (0..=60)
                .map(|i| 1.0 + 0.05 * i as f64)
                .map(|s| (f.measured_rho(s).unwrap() - 1.0 / s).abs())
                .fold(0.0, f64::max)
        };
        let calibrated = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS).unwrap();
        let g = gap(&calibrated);
        assert!(g > 0.10 && g < 0.11, "gap at calibrated width: {g}");
        let wide = UniformLshFamily::with_width(Metric::L2, 1.0, 3.0, RhoModel::InverseS).unwrap();
        assert!(gap(&wide) <= 0.05, "gap at w = 3: {}", gap(&wide));
    }

    #[test]
    fn mu_closed_forms() {
        let f = AnalyticModel::new(0.5, RhoModel::InverseS).unwrap();
        assert_eq!(f.mu_for(1.5).unwrap(), 3.0);
        assert_eq!(f.mu_for(1.0).unwrap(), 2.0);
        let g = AnalyticModel::new(0.5, RhoModel::InverseSSquared).unwrap();
        assert!((g.mu_for(2.0).unwrap() - 8f64.sqrt()).abs() < 1e-12);
        assert!(f.mu_for(0.9).is_err());
        assert!(AnalyticModel::new(0.5, RhoModel::Tabulated).is_err());
        assert!(AnalyticModel::new(1.0, RhoModel::InverseS).is_err());
    }

    #[test]
    fn mu_tabulated_solves_half_rho() {
        for metric in [Metric::L1, Metric::L2] {
            let f = UniformLshFamily::new(metric, 1.0, RhoModel::Tabulated).unwrap();
            for alpha in [1.0, 1.5, 2.0, 4.0] {
                let mu = f.mu_for(alpha).unwrap();
                let err = (f.rho(mu).unwrap() - 0.5 * f.rho(alpha).unwrap()).abs();
                assert!(err <= 1e-9, "{metric} alpha={alpha} mu={mu} err={err}");
                assert!(mu > alpha);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let f = UniformLshFamily::new(Metric::L1, 1.0, RhoModel::InverseS).unwrap();
        assert_eq!(sample_hash(&f, 7, 42), sample_hash(&f, 7, 42));
        assert_ne!(sample_hash(&f, 7, 42), sample_hash(&f, 7, 43));
        let h = sample_hash(&f, 7, 1);
        assert!(h.offset >= 0.0 && h.offset < f.width());
        assert!(h.projection.iter().all(|a| a.is_finite()));
    }

    #[test]
    fn gaussian_projection_mean() {
        let f = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS).unwrap();
        let h = sample_hash(&f, 1_000_000, 3);
        let mean = h.projection.iter().sum::<f64>() / 1e6;
        // σ/√N = 1e-3; allow three of those
        assert!(mean.abs() < 3e-3, "{mean}");
    }

    #[test]
    fn cauchy_abs_median_is_one() {
        let f = UniformLshFamily::new(Metric::L1, 1.0, RhoModel::InverseS).unwrap();
        let mut abs: Vec<f64> = sample_hash(&f, 200_001, 4).projection.iter().map(|a| a.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let median = abs[100_000];
        // sd of the sample median ≈ 1/(2 f(1) √N) = π/(2√N) ≈ 0.0035 for the half-Cauchy
        assert!((median - 1.0).abs() < 0.015, "{median}");
    }

    #[test]
    fn hash_evaluation() {
        let f = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS).unwrap();
        let h = sample_hash(&f, 4, 8);
        let x = [0.3, -1.2, 2.0, 0.7];
        assert_eq!(eval_hash(&h, &x).unwrap(), eval_hash(&h, &x).unwrap());
        assert!(eval_hash(&h, &x[..3]).is_err());

        // move x so its projection sits mid-bucket, then shift by w along a/‖a‖²
        let norm2: f64 = h.projection.iter().map(|a| a * a).sum();
        let dot: f64 = h.projection.iter().zip(&x).map(|(a, b)| a * b).sum();
        let frac = ((dot + h.offset) / h.width).fract();
        let centre: Vec<f64> = x
            .iter()
            .zip(&h.projection)
            .map(|(xi, a)| xi + (0.5 - frac) * h.width * a / norm2)
            .collect();
        let base = eval_hash(&h, &centre).unwrap();
        for step in 1..5 {
            let moved: Vec<f64> = centre
                .iter()
                .zip(&h.projection)
                .map(|(xi, a)| xi + step as f64 * h.width * a / norm2)
                .collect();
            assert_eq!(eval_hash(&h, &moved).unwrap(), base + step);
        }
    }

    #[test]
    fn descriptor_round_trip() {
        for metric in [Metric::L1, Metric::L2] {
            let f = UniformLshFamily::new(metric, 0.75, RhoModel::InverseSSquared).unwrap();
            let back = UniformLshFamily::from_record(&f.to_record()).unwrap();
            assert_eq!(back, f);
        }
        assert!(UniformLshFamily::from_record("name=gaussian;p=1;w=1;r=1;rho_model=inverse_s").is_err());
        assert!(UniformLshFamily::from_record("name=gaussian;p=2;w=1").is_err());
    }
}
