//! Packing bounds, the two-band candidate bound and the `(K, L)` planners.
//!
//! All planners share one pipeline. Given a candidate scale `M` (the number of far points a
//! round can be expected to meet at the first band) they set
//!
//! ```text
//! K* = −ρ(α)·ln M / ln p(1),   K = max(1, ⌈K*⌉),   L = ⌈p(1)^{−K}·ln(1/δ)⌉
//! ```
//!
//! and predict a per-query cost of `M^{ρ(α)}`. They differ only in `M`:
//!
//! - dimensional: `(1 + 2μ/β)^{d/2}·√(2N_β + n)`
//! - doubling:    `(1 + 4μ/β)^{(d0+1)/2}·√(2N_β + 2n)`
//! - classical:   `n`
//!
//! where `μ` solves `ρ(μ) = ρ(α)/2`. The `o(1)` exponent corrections are taken as zero, so
//! predicted costs are model values.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::dispersion::DispersionProfile;
use crate::lsh_families::CollisionModel;
use crate::{Error, Result};

fn max_pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

fn check_counts(n: u64, n_beta: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    if n_beta > max_pairs(n) {
        return Err(Error::InconsistentInputs(format!(
            "N_beta = {n_beta} exceeds n(n-1)/2 = {} for n = {n}",
            max_pairs(n)
        )));
    }
    Ok(())
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::param(format!("{what} must be positive, got {v}")))
    }
}

/// Lower bound on `max_i ‖x_i − x_0‖` for any `x_0 ∈ ℝ^d`:
/// `½((n² / (2N_β + n))^{1/d} − 1)·βr`. Non-positive values are returned as-is.
pub fn packing_lower_bound(n: u64, n_beta: u64, beta: f64, r: f64, d: f64) -> Result<f64> {
    check_counts(n, n_beta)?;
    check_positive("beta", beta)?;
    check_positive("r", r)?;
    if !(d >= 1.0) {
        return Err(Error::param(format!("dimension must be ≥ 1, got {d}")));
    }
    let (n, n_beta) = (n as f64, n_beta as f64);
    let ratio = n * n / (2.0 * n_beta + n);
    Ok(0.5 * (ratio.powf(1.0 / d) - 1.0) * beta * r)
}

/// Doubling-dimension analogue: `¼((n² / (2N_β + 2n))^{1/(d0+1)} − 1)·βr`.
pub fn doubling_packing_lower_bound(n: u64, n_beta: u64, beta: f64, r: f64, d0: f64) -> Result<f64> {
    check_counts(n, n_beta)?;
    check_positive("beta", beta)?;
    check_positive("r", r)?;
    if !(d0 >= 0.0) {
        return Err(Error::param(format!("doubling dimension must be ≥ 0, got {d0}")));
    }
    let (n, n_beta) = (n as f64, n_beta as f64);
    let ratio = n * n / (2.0 * n_beta + 2.0 * n);
    Ok(0.25 * ((ratio).powf(1.0 / (d0 + 1.0)) - 1.0) * beta * r)
}

/// Which packing bound drives the candidate cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Ambient dimension `d`.
    Dimension,
    /// Doubling dimension `d0`.
    Doubling,
}

/// Upper bound on the number of points within `(α+η)r` of any query:
/// `(1 + 2(α+η)/β)^{d/2}·√(2N_β + n)`, or `(1 + 4(α+η)/β)^{(d0+1)/2}·√(2N_β + 2n)`.
pub fn candidate_cap(geometry: Geometry, n: u64, n_beta: u64, beta: f64, reach: f64, dim: f64) -> f64 {
    let (n, n_beta) = (n as f64, n_beta as f64);
    match geometry {
        Geometry::Dimension => (1.0 + 2.0 * reach / beta).powf(dim / 2.0) * (2.0 * n_beta + n).sqrt(),
        Geometry::Doubling => {
            (1.0 + 4.0 * reach / beta).powf((dim + 1.0) / 2.0) * (2.0 * n_beta + 2.0 * n).sqrt()
        }
    }
}

/// Both bands of the summation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummationBound {
    /// `p^{1/ρ(α)}·k0`: points between `αr` and `(α+η)r`, each collides with probability at most `p^{1/ρ(α)}`.
    pub term1: f64,
    /// `p^{1/ρ(α+η)}·n`: everything farther.
    pub term2: f64,
    /// The candidate cap `k0` used in `term1`.
    pub k0: f64,
}

impl SummationBound {
    pub fn total(&self) -> f64 {
        self.term1 + self.term2
    }
}

/// Bounds `Σ_{‖x_i − x_0‖ ≥ αr} p^{1/ρ(‖x_i − x_0‖/r)}` for any query `x_0`.
#[allow(clippy::too_many_arguments)]
pub fn summation_bound<F: CollisionModel + ?Sized>(
    geometry: Geometry,
    n: u64,
    n_beta: u64,
    beta: f64,
    alpha: f64,
    eta: f64,
    dim: f64,
    p: f64,
    family: &F,
) -> Result<SummationBound> {
    check_counts(n, n_beta)?;
    check_positive("beta", beta)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("p must lie in (0, 1), got {p}")));
    }
    if !(alpha >= 1.0) {
        return Err(Error::param(format!("alpha must be ≥ 1, got {alpha}")));
    }
    if !(eta >= 0.0) {
        return Err(Error::param(format!("eta must be ≥ 0, got {eta}")));
    }
    let k0 = candidate_cap(geometry, n, n_beta, beta, alpha + eta, dim);
    let term1 = p.powf(1.0 / family.rho(alpha)?) * k0;
    let term2 = p.powf(1.0 / family.rho(alpha + eta)?) * n as f64;
    Ok(SummationBound { term1, term2, k0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanMode {
    RefinedDim,
    RefinedDoubling,
    Classical,
}

impl PlanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanMode::RefinedDim => "refined_dim",
            PlanMode::RefinedDoubling => "refined_doubling",
            PlanMode::Classical => "classical",
        }
    }

    pub fn geometry(self) -> Option<Geometry> {
        match self {
            PlanMode::RefinedDim => Some(Geometry::Dimension),
            PlanMode::RefinedDoubling => Some(Geometry::Doubling),
            PlanMode::Classical => None,
        }
    }
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refined_dim" | "refined" => Ok(PlanMode::RefinedDim),
            "refined_doubling" | "doubling" => Ok(PlanMode::RefinedDoubling),
            "classical" => Ok(PlanMode::Classical),
            other => Err(Error::param(format!("unknown plan mode {other:?}"))),
        }
    }
}

/// Inputs shared by every planner. `dim` is `d` for dimensional plans and `d0` for doubling
/// plans; classical plans ignore `n_beta`, `beta` and `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanRequest {
    pub n: u64,
    pub n_beta: u64,
    pub dim: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub delta: f64,
}

impl PlanRequest {
    fn validate(&self, mode: PlanMode) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be ≥ 1, got {}", self.alpha)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        check_positive("r", self.r)?;
        if mode == PlanMode::Classical {
            if self.n == 0 {
                return Err(Error::param("n must be at least 1"));
            }
            return Ok(());
        }
        check_counts(self.n, self.n_beta)?;
        check_positive("beta", self.beta)?;
        let min_dim = if mode == PlanMode::RefinedDim { 1.0 } else { 0.0 };
        if !(self.dim >= min_dim && self.dim.is_finite()) {
            return Err(Error::param(format!("dimension must be ≥ {min_dim}, got {}", self.dim)));
        }
        Ok(())
    }
}

/// Output of the planners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanParams {
    pub mode: PlanMode,
    pub k: usize,
    pub l: usize,
    pub alpha: f64,
    /// `+∞` for classical plans.
    pub beta: f64,
    pub r: f64,
    pub delta: f64,
    pub mu: f64,
    pub eta: f64,
    /// Candidate scale after clamping to at least 1.
    pub m: f64,
    /// Set when the raw candidate scale fell below 1.
    pub m_clamped: bool,
    /// Unrounded `K*`.
    pub k_real: f64,
    pub p1: f64,
    pub rho_alpha: f64,
    /// `M^{ρ(α)}`, excluding the common `τ·ln(1/δ)` factor.
    pub predicted_cost: f64,
    pub n: u64,
    pub n_beta: u64,
    pub dim: f64,
}

impl PlanParams {
    /// `ln(predicted_cost) / ln n`; zero for `n = 1`.
    pub fn exponent(&self) -> f64 {
        if self.n <= 1 {
            0.0
        } else {
            self.predicted_cost.ln() / (self.n as f64).ln()
        }
    }

    /// `p(1)^K`: per-table collision probability at distance `r`.
    pub fn table_p1(&self) -> f64 {
        self.p1.powi(self.k as i32)
    }

    /// `1 − (1 − p(1)^K)^L`: probability a point at distance `r` shares a bucket in some table.
    pub fn success_probability(&self) -> f64 {
        1.0 - (1.0 - self.table_p1()).powi(self.l as i32)
    }
}

/// `L = ⌈p(1)^{−K}·ln(1/δ)⌉`, at least 1.
pub fn tables_for(p1: f64, k: usize, delta: f64) -> usize {
    let l = (p1.powi(-(k as i32)) * (1.0 / delta).ln()).ceil();
    (l as usize).max(1)
}

fn finish<F: CollisionModel + ?Sized>(
    mode: PlanMode,
    req: &PlanRequest,
    mu: f64,
    raw_m: f64,
    family: &F,
) -> Result<PlanParams> {
    let p1 = family.p1();
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::param(format!("family p(1) must lie in (0, 1), got {p1}")));
    }
    let rho_alpha = family.rho(req.alpha)?;
    let m_clamped = raw_m < 1.0;
    let m = raw_m.max(1.0);
    let k_real = -rho_alpha * m.ln() / p1.ln();
    let k = (k_real.ceil() as usize).max(1);
    let l = tables_for(p1, k, req.delta);
    Ok(PlanParams {
        mode,
        k,
        l,
        alpha: req.alpha,
        beta: if mode == PlanMode::Classical { f64::INFINITY } else { req.beta },
        r: req.r,
        delta: req.delta,
        mu,
        eta: mu - req.alpha,
        m,
        m_clamped,
        k_real,
        p1,
        rho_alpha,
        predicted_cost: m.powf(rho_alpha),
        n: req.n,
        n_beta: req.n_beta,
        dim: req.dim,
    })
}

/// Plan from the ambient-dimension packing bound.
pub fn plan_refined<F: CollisionModel + ?Sized>(req: &PlanRequest, family: &F) -> Result<PlanParams> {
    req.validate(PlanMode::RefinedDim)?;
    let mu = family.mu_for(req.alpha)?;
    let m = candidate_cap(Geometry::Dimension, req.n, req.n_beta, req.beta, mu, req.dim);
    finish(PlanMode::RefinedDim, req, mu, m, family)
}

/// Plan from the doubling-dimension packing bound; `req.dim` is `d0`.
pub fn plan_doubling<F: CollisionModel + ?Sized>(req: &PlanRequest, family: &F) -> Result<PlanParams> {
    req.validate(PlanMode::RefinedDoubling)?;
    let mu = family.mu_for(req.alpha)?;
    let m = candidate_cap(Geometry::Doubling, req.n, req.n_beta, req.beta, mu, req.dim);
    finish(PlanMode::RefinedDoubling, req, mu, m, family)
}

/// Worst-case plan: every far point is taken to sit at exactly `αr`, so `M = n`.
pub fn plan_classical<F: CollisionModel + ?Sized>(req: &PlanRequest, family: &F) -> Result<PlanParams> {
    req.validate(PlanMode::Classical)?;
    finish(PlanMode::Classical, req, req.alpha, req.n as f64, family)
}

pub fn plan<F: CollisionModel + ?Sized>(mode: PlanMode, req: &PlanRequest, family: &F) -> Result<PlanParams> {
    match mode {
        PlanMode::RefinedDim => plan_refined(req, family),
        PlanMode::RefinedDoubling => plan_doubling(req, family),
        PlanMode::Classical => plan_classical(req, family),
    }
}

/// Evaluates the refined planner at every profiled `β` and keeps the cheapest plan,
/// preferring the larger `β` on ties. Classical mode ignores the profile.
pub fn optimize_beta<F: CollisionModel + ?Sized>(
    profile: &DispersionProfile,
    dim: f64,
    alpha: f64,
    delta: f64,
    family: &F,
    mode: PlanMode,
) -> Result<PlanParams> {
    let n = profile.n() as u64;
    let base = PlanRequest { n, n_beta: 0, dim, alpha, beta: 1.0, r: profile.r(), delta };
    if mode == PlanMode::Classical {
        return plan_classical(&base, family);
    }
    let mut best: Option<PlanParams> = None;
    for (beta, n_beta) in profile.iter() {
        let candidate = plan(mode, &PlanRequest { n_beta, beta, ..base }, family)?;
        if best.is_none_or(|b| candidate.predicted_cost <= b.predicted_cost) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| Error::param("profile has no beta values"))
}

/// Query-time exponent for well-dispersed data under an optimal data-independent family:
/// `(1/(2α²))·(1 + ε + ξ·log2(1 + 4√2·α/C))`. `C = +∞` drops the last term.
pub fn asymptotic_exponent(alpha: f64, eps: f64, xi: f64, c: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::param(format!("alpha must be ≥ 1, got {alpha}")));
    }
    check_positive("eps", eps)?;
    check_positive("C", c)?;
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::param(format!("xi must lie in [0, 1], got {xi}")));
    }
    let spread = if c.is_infinite() {
        0.0
    } else {
        (1.0 + 4.0 * std::f64::consts::SQRT_2 * alpha / c).log2()
    };
    Ok((1.0 + eps + xi * spread) / (2.0 * alpha * alpha))
}

/// `ξ = d0 / log2 n`, clamped to `[0, 1]`; zero for `n = 1`.
pub fn normalized_doubling(d0: f64, n: u64) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (d0 / (n as f64).log2()).clamp(0.0, 1.0)
    }
}

/// Bound summary for one plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub mode: PlanMode,
    pub n: u64,
    pub n_beta: u64,
    pub beta: f64,
    pub r: f64,
    pub dim: f64,
    pub alpha: f64,
    /// Packing lower bound `r*` on the farthest point from any query (may be ≤ 0).
    pub packing_radius_lb: f64,
    /// `k0`: cap on points within `(α+η)r`.
    pub candidate_cap: f64,
    /// Summation bound at the plan's `p(1)^K`.
    pub summation_value: f64,
    pub exponent: f64,
    pub xi: f64,
}

/// Bounds implied by a refined plan; `d0` feeds `ξ` (pass the plan's own `dim` for doubling plans).
pub fn bound_report<F: CollisionModel + ?Sized>(plan: &PlanParams, family: &F, d0: f64) -> Result<BoundReport> {
    let geometry = plan
        .mode
        .geometry()
        .ok_or_else(|| Error::param("bound reports need a refined plan"))?;
    let packing_radius_lb = match geometry {
        Geometry::Dimension => packing_lower_bound(plan.n, plan.n_beta, plan.beta, plan.r, plan.dim)?,
        Geometry::Doubling => doubling_packing_lower_bound(plan.n, plan.n_beta, plan.beta, plan.r, plan.dim)?,
    };
    let sum = summation_bound(
        geometry,
        plan.n,
        plan.n_beta,
        plan.beta,
        plan.alpha,
        plan.eta,
        plan.dim,
        plan.table_p1(),
        family,
    )?;
    Ok(BoundReport {
        mode: plan.mode,
        n: plan.n,
        n_beta: plan.n_beta,
        beta: plan.beta,
        r: plan.r,
        dim: plan.dim,
        alpha: plan.alpha,
        packing_radius_lb,
        candidate_cap: sum.k0,
        summation_value: sum.total(),
        exponent: plan.exponent(),
        xi: normalized_doubling(d0, plan.n),
    })
}

pub const PLAN_CSV_HEADER: &str = "mode,alpha,beta,n,n_beta,d_or_d0,K,L,M,predicted_cost,exponent";

pub fn write_plan_row<W: Write>(p: &PlanParams, mut w: W) -> Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{}",
        p.mode,
        p.alpha,
        p.beta,
        p.n,
        p.n_beta,
        p.dim,
        p.k,
        p.l,
        p.m,
        p.predicted_cost,
        p.exponent()
    )?;
    Ok(())
}

pub fn write_plans_csv<W: Write>(plans: &[PlanParams], mut w: W) -> Result<()> {
    writeln!(w, "{PLAN_CSV_HEADER}")?;
    for p in plans {
        write_plan_row(p, &mut w)?;
    }
    Ok(())
}
