//! End-to-end acceptance run. Prints one line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use dlsh::bench::{strip_wall_columns, write_bench_csv, BenchRecord};
use dlsh::bounds::{asymptotic_exponent, normalized_doubling, plan_doubling, PlanRequest};
use dlsh::dispersion::{c_epsilon, estimate_doubling_dim, profile, CEpsilon};
use dlsh::geometry::{generate, Generator};
use dlsh::lsh_families::{RhoModel, UniformLshFamily};
use dlsh::verify::{self, paired_plans, recall_floor, SuiteReport};
use dlsh::{Metric, Result};

const SEED: u64 = 20240601;

type Criterion = (&'static str, fn() -> Result<Verdict>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn from_reports(reports: &[SuiteReport]) -> Verdict {
    let checks: u64 = reports.iter().map(|r| r.checks).sum();
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{}: {}", r.name, r.counterexample.as_deref().unwrap_or("?")))
        .collect();
    Verdict {
        pass: failed.is_empty(),
        detail: if failed.is_empty() { format!("{checks} checks") } else { failed.join("; ") },
    }
}

fn graph_packing() -> Result<Verdict> {
    Ok(from_reports(&[verify::graph_suite(1000, SEED)?]))
}

fn packing_bounds() -> Result<Verdict> {
    Ok(from_reports(&[
        verify::packing_bound_oracle(500, 10, SEED)?,
        verify::doubling_bound_oracle(100, SEED)?,
    ]))
}

fn collision_fidelity() -> Result<Verdict> {
    Ok(from_reports(&[verify::collision_monte_carlo(1_000_000, SEED)?]))
}

fn mu_solver() -> Result<Verdict> {
    Ok(from_reports(&[verify::mu_exactness()?]))
}

fn half_steps(max: f64, step: f64) -> Vec<f64> {
    (1..=(max / step).round() as usize).map(|i| i as f64 * step).collect()
}

fn recall_guarantee() -> Result<Verdict> {
    let (alpha, delta, queries) = (2.0, 0.1, 1000);
    let data = Arc::new(generate(&Generator::UniformCube { side: 10.0 }, 10_000, 16, Metric::L2, SEED)?);
    let family = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS)?;
    let records = paired_plans(&data, "cube16", &family, &half_steps(8.0, 0.5), alpha, delta, queries, SEED)?;
    let floor = recall_floor(delta, queries);
    let detail = records
        .iter()
        .map(|r| format!("{} K={} L={} recall={:.3}", r.mode, r.k, r.l, r.recall))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Verdict {
        pass: records.len() == 2 && records.iter().all(|r| r.recall >= floor),
        detail: format!("{detail} (floor {floor:.4})"),
    })
}

fn candidate_bound() -> Result<Verdict> {
    let family = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::Tabulated)?;
    let fixtures = [
        ("lattice", generate(&Generator::Lattice { gap: 2.0 }, 10_000, 2, Metric::L2, SEED)?),
        ("cube", generate(&Generator::UniformCube { side: 10.0 }, 5_000, 4, Metric::L2, SEED)?),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (id, ds) in fixtures {
        let data = Arc::new(ds);
        for r in paired_plans(&data, id, &family, &half_steps(4.0, 0.25), 2.0, 0.1, 500, SEED)? {
            let ok = r.mean_far_per_table <= r.predicted_bound + 3.0 * r.far_per_table_se;
            pass &= ok;
            parts.push(format!("{id}/{}: {:.4} vs {:.4}", r.mode, r.mean_far_per_table, r.predicted_bound));
        }
    }
    Ok(Verdict { pass, detail: parts.join(", ") })
}

fn limit_consistency() -> Result<Verdict> {
    Ok(from_reports(&[verify::limit_consistency(&[1_000, 10_000])?]))
}

fn dispersion_advantage() -> Result<Verdict> {
    let (alpha, delta, eps, queries) = (2.0, 0.1, 0.1, 1000);
    let data = Arc::new(generate(&Generator::Lattice { gap: 2.0 }, 10_000, 2, Metric::L2, SEED)?);
    let family = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS)?;
    let betas = half_steps(4.0, 0.25);
    let records = paired_plans(&data, "lattice", &family, &betas, alpha, delta, queries, SEED)?;
    let (refined, classical) = (&records[0], &records[1]);
    let floor = recall_floor(delta, queries);
    let measured = refined.total_work <= classical.total_work && refined.recall >= floor && classical.recall >= floor;

    let prof = profile(&data, 1.0, &betas)?;
    let c = match c_epsilon(&prof, eps) {
        CEpsilon::Finite(c) => c,
        other => {
            return Ok(Verdict { pass: false, detail: format!("C_eps not finite on the grid: {other:?}") });
        }
    };
    let n_beta = prof.iter().find(|&(b, _)| b == c).map(|(_, count)| count).unwrap_or(0);
    let d0 = estimate_doubling_dim(&data, SEED)?.d0;
    let n = data.len() as u64;
    let xi = normalized_doubling(d0, n);
    let asymptotic = asymptotic_exponent(alpha, eps, xi, c)?;
    let model = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseSSquared)?;
    let req = PlanRequest { n, n_beta, dim: d0, alpha, beta: c, r: 1.0, delta };
    let planned = plan_doubling(&req, &model)?.exponent();
    let exponent_ok = asymptotic <= 1.0 / (alpha * alpha) && (asymptotic - planned).abs() <= 0.05;
    Ok(Verdict {
        pass: measured && exponent_ok,
        detail: format!(
            "work {:.1} vs {:.1}, recall {:.3}/{:.3}; C_eps={c}, xi={xi:.4}, exponent {asymptotic:.4} vs plan {planned:.4}",
            refined.total_work, classical.total_work, refined.recall, classical.recall
        ),
    })
}

fn csv_run() -> Result<String> {
    let mut out = Vec::new();
    verify::write_report(&verify::run("all", SEED)?, &mut out)?;
    let data = Arc::new(generate(&Generator::Lattice { gap: 2.0 }, 2_500, 2, Metric::L2, SEED)?);
    let family = UniformLshFamily::new(Metric::L2, 1.0, RhoModel::InverseS)?;
    let records: Vec<BenchRecord> = paired_plans(&data, "lattice", &family, &half_steps(4.0, 0.25), 2.0, 0.1, 300, SEED)?;
    let mut bench = Vec::new();
    write_bench_csv(&records, true, &mut bench)?;
    Ok(String::from_utf8(out).expect("utf8") + &strip_wall_columns(&String::from_utf8(bench).expect("utf8")))
}

fn determinism() -> Result<Verdict> {
    let a = csv_run()?;
    let b = csv_run()?;
    Ok(Verdict { pass: a == b, detail: format!("{} bytes compared", a.len()) })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("graph packing", graph_packing),
        ("packing bound oracle", packing_bounds),
        ("collision probability", collision_fidelity),
        ("mu solver", mu_solver),
        ("recall guarantee", recall_guarantee),
        ("candidate bound", candidate_bound),
        ("limit consistency", limit_consistency),
        ("dispersion advantage", dispersion_advantage),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let verdict = run().unwrap_or_else(|e| Verdict { pass: false, detail: format!("error: {e}") });
        if !verdict.pass {
            failures += 1;
        }
        println!(
            "criterion {} {name}: {} ({}; {:.1}s)",
            i + 1,
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.detail,
            started.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
