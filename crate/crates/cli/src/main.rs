use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlsh::bench::{planted_queries, random_queries, run_bench, write_bench_csv};
use dlsh::bounds::{
    asymptotic_exponent, normalized_doubling, optimize_beta, write_plan_row, PlanMode, PlanParams, PLAN_CSV_HEADER,
};
use dlsh::dispersion::{c_epsilon, estimate_doubling_dim, profile, CEpsilon, DispersionProfile};
use dlsh::geometry::{generate, load, save_binary, save_csv, Generator};
use dlsh::index::{LshIndex, Outcome};
use dlsh::lsh_families::{RhoModel, UniformLshFamily};
use dlsh::verify;
use dlsh::{Dataset, Error, Metric};

#[derive(Parser)]
#[command(name = "dlsh", version, about = "Dispersion-aware LSH: profile, plan, index, benchmark")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted; required by `gen` and `build`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (binary, or CSV for a `.csv` path).
    Gen(GenArgs),
    /// Near-pair profile over a β grid, with C_ε and a doubling-dimension estimate.
    Profile(ProfileArgs),
    /// Refined, doubling and classical (K, L) plans side by side.
    Plan(PlanArgs),
    /// Build an index and write it to --out.
    Build(BuildArgs),
    /// Query a saved index.
    Query(QueryArgs),
    /// Benchmark plans on planted or random queries; appends to --out.
    Bench(BenchArgs),
    /// Run property suites: packing, graph, collision, recall, bounds or all.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    UniformCube,
    Lattice,
    GaussianClusters,
    Sparse,
    Curve,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(short, long)]
    n: usize,
    #[arg(short, long)]
    d: usize,
    #[arg(long, default_value = "l2")]
    metric: Metric,
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    #[arg(long, default_value_t = 2.0)]
    gap: f64,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 10.0)]
    spread: f64,
    #[arg(long, default_value_t = 0.01)]
    density: f64,
    #[arg(long, default_value_t = 100.0)]
    length: f64,
    #[arg(long, default_value_t = 0.0)]
    bend: f64,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file (binary, or `.csv`).
    dataset: PathBuf,
    /// Metric for CSV datasets.
    #[arg(long, default_value = "l2")]
    metric: Metric,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated β grid; overrides --beta-max/--beta-step.
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 4.0)]
    beta_max: f64,
    #[arg(long, default_value_t = 0.25)]
    beta_step: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<f64>, Error> {
        if let Some(b) = &self.betas {
            return Ok(b.clone());
        }
        if !(self.beta_step > 0.0 && self.beta_max >= self.beta_step) {
            return Err(Error::InvalidParameter("need 0 < --beta-step <= --beta-max".into()));
        }
        let steps = (self.beta_max / self.beta_step + 1e-9).floor() as usize;
        Ok((1..=steps).map(|i| i as f64 * self.beta_step).collect())
    }
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ModeArg {
    Refined,
    Doubling,
    Classical,
    All,
}

impl ModeArg {
    fn modes(self) -> Vec<PlanMode> {
        match self {
            ModeArg::Refined => vec![PlanMode::RefinedDim],
            ModeArg::Doubling => vec![PlanMode::RefinedDoubling],
            ModeArg::Classical => vec![PlanMode::Classical],
            ModeArg::All => vec![PlanMode::RefinedDim, PlanMode::RefinedDoubling, PlanMode::Classical],
        }
    }
}

#[derive(Args)]
struct PlanningArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value = "inverse_s")]
    rho_model: RhoModel,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    planning: PlanningArgs,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',', default_value = "1,1.4142135623730951,2,4")]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    planning: PlanningArgs,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Index written by `build`.
    #[arg(long)]
    index: PathBuf,
    /// CSV file of query points.
    #[arg(long, conflicts_with = "planted")]
    queries: Option<PathBuf>,
    /// Number of planted queries to generate instead.
    #[arg(long)]
    planted: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    planning: PlanningArgs,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    /// Use uniformly random queries instead of planted ones.
    #[arg(long)]
    random: bool,
    /// Dataset label for the records (defaults to the file stem).
    #[arg(long)]
    id: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(default_value = "all")]
    suite: String,
}

fn output(out: &Option<PathBuf>, append: bool) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            let file = if append {
                OpenOptions::new().create(true).append(true).open(path)?
            } else {
                File::create(path)?
            };
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_data(args: &DataArgs) -> Result<Arc<Dataset>, Error> {
    Ok(Arc::new(load(&args.dataset, args.metric)?))
}

fn family_for(ds: &Dataset, r: f64, rho_model: RhoModel) -> Result<UniformLshFamily, Error> {
    UniformLshFamily::new(ds.metric(), r, rho_model)
}

fn plans_for(
    ds: &Dataset,
    prof: &DispersionProfile,
    alpha: f64,
    planning: &PlanningArgs,
    family: &UniformLshFamily,
    seed: u64,
) -> Result<Vec<PlanParams>, Error> {
    let mut d0 = None;
    planning
        .mode
        .modes()
        .into_iter()
        .map(|mode| {
            let dim = match mode {
                PlanMode::RefinedDoubling => *d0.get_or_insert(estimate_doubling_dim(ds, seed)?.d0),
                _ => ds.dim() as f64,
            };
            optimize_beta(prof, dim, alpha, planning.delta, family, mode)
        })
        .collect()
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> Result<(), Error> {
    let kind = match a.kind {
        Kind::UniformCube => Generator::UniformCube { side: a.side },
        Kind::Lattice => Generator::Lattice { gap: a.gap },
        Kind::GaussianClusters => Generator::GaussianClusters { k: a.clusters, sigma: a.sigma, spread: a.spread },
        Kind::Sparse => Generator::Sparse { density: a.density },
        Kind::Curve => Generator::Curve { length: a.length, bend: a.bend },
    };
    let path = cli.out.as_ref().ok_or_else(|| Error::InvalidParameter("gen needs --out".into()))?;
    let ds = generate(&kind, a.n, a.d, a.metric, cli.seed)?;
    if path.extension().is_some_and(|e| e == "csv") {
        save_csv(&ds, path)?;
    } else {
        save_binary(&ds, path)?;
    }
    println!("n={} d={} metric={}", ds.len(), ds.dim(), ds.metric());
    Ok(())
}

fn c_eps_text(c: CEpsilon) -> String {
    match c {
        CEpsilon::Finite(b) => b.to_string(),
        CEpsilon::Unbounded => "inf".into(),
        CEpsilon::NoQualifyingBeta => "none".into(),
    }
}

fn cmd_profile(cli: &Cli, a: &ProfileArgs) -> Result<(), Error> {
    let ds = load_data(&a.data)?;
    let prof = profile(&ds, a.data.r, &a.grid.grid()?)?;
    let d0 = estimate_doubling_dim(&ds, cli.seed)?;
    let mut w = output(&cli.out, false)?;
    prof.write_csv(&mut w)?;
    writeln!(w, "# c_epsilon,eps={},{}", a.eps, c_eps_text(c_epsilon(&prof, a.eps)))?;
    writeln!(w, "# doubling_dim,{},scales={}", d0.d0, d0.scales_used)?;
    w.flush()?;
    Ok(())
}

fn cmd_plan(cli: &Cli, a: &PlanArgs) -> Result<(), Error> {
    let ds = load_data(&a.data)?;
    let prof = profile(&ds, a.data.r, &a.planning.grid.grid()?)?;
    let family = family_for(&ds, a.data.r, a.planning.rho_model)?;
    let d0 = estimate_doubling_dim(&ds, cli.seed)?.d0;
    let xi = normalized_doubling(d0, ds.len() as u64);
    let c = c_epsilon(&prof, a.eps);
    let mut w = output(&cli.out, false)?;
    writeln!(w, "{PLAN_CSV_HEADER},c_epsilon,xi,asymptotic_exponent")?;
    for &alpha in &a.alpha {
        let asymptotic = match c.value() {
            Some(cv) => asymptotic_exponent(alpha, a.eps, xi, cv)?.to_string(),
            None => "nan".into(),
        };
        for plan in plans_for(&ds, &prof, alpha, &a.planning, &family, cli.seed)? {
            let mut row = Vec::new();
            write_plan_row(&plan, &mut row)?;
            let row = String::from_utf8(row).expect("ascii row");
            writeln!(w, "{},{},{xi},{asymptotic}", row.trim_end(), c_eps_text(c))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn single_mode(planning: &PlanningArgs) -> Result<(), Error> {
    if planning.mode == ModeArg::All {
        Err(Error::InvalidParameter("choose one --mode for build".into()))
    } else {
        Ok(())
    }
}

fn cmd_build(cli: &Cli, a: &BuildArgs) -> Result<(), Error> {
    single_mode(&a.planning)?;
    let path = cli.out.as_ref().ok_or_else(|| Error::InvalidParameter("build needs --out".into()))?;
    let ds = load_data(&a.data)?;
    let prof = profile(&ds, a.data.r, &a.planning.grid.grid()?)?;
    let family = family_for(&ds, a.data.r, a.planning.rho_model)?;
    let plan = plans_for(&ds, &prof, a.alpha, &a.planning, &family, cli.seed)?.remove(0);
    let index = LshIndex::build(ds, plan, family, cli.seed)?;
    index.save(path)?;
    println!("mode={} K={} L={} beta={}", plan.mode, plan.k, plan.l, plan.beta);
    Ok(())
}

fn cmd_query(cli: &Cli, a: &QueryArgs) -> Result<(), Error> {
    let ds = load_data(&a.data)?;
    let index = LshIndex::load(&a.index, ds.clone())?;
    let queries: Vec<Vec<f64>> = match (&a.queries, a.planted) {
        (Some(path), _) => load(path, ds.metric())?.points().map(<[f64]>::to_vec).collect(),
        (None, Some(count)) => planted_queries(&ds, index.plan().r, count, cli.seed),
        (None, None) => return Err(Error::InvalidParameter("give --queries or --planted".into())),
    };
    let mut w = output(&cli.out, false)?;
    writeln!(w, "query,found,index,distance,rounds,candidates,far_candidates,hash_evaluations")?;
    for (i, q) in queries.iter().enumerate() {
        let s = index.query(q)?;
        let (found, idx, dist) = match s.outcome {
            Outcome::Found { index, distance } => (1, index.to_string(), distance.to_string()),
            Outcome::NotFound => (0, String::new(), String::new()),
        };
        writeln!(
            w,
            "{i},{found},{idx},{dist},{},{},{},{}",
            s.rounds_executed, s.candidates_examined, s.far_candidates, s.hash_evaluations
        )?;
    }
    w.flush()?;
    Ok(())
}

fn is_empty_file(path: &Path) -> bool {
    std::fs::metadata(path).map_or(true, |m| m.len() == 0)
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> Result<(), Error> {
    let ds = load_data(&a.data)?;
    let prof = profile(&ds, a.data.r, &a.planning.grid.grid()?)?;
    let family = family_for(&ds, a.data.r, a.planning.rho_model)?;
    let plans = plans_for(&ds, &prof, a.alpha, &a.planning, &family, cli.seed)?;
    let queries = if a.random {
        random_queries(&ds, a.queries, cli.seed)
    } else {
        planted_queries(&ds, a.data.r, a.queries, cli.seed)
    };
    let id = a.id.clone().unwrap_or_else(|| {
        a.data.dataset.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned())
    });
    let records = run_bench(&ds, &id, &plans, &family, &queries, cli.seed)?;
    let header = cli.out.as_deref().is_none_or(is_empty_file);
    let mut w = output(&cli.out, true)?;
    write_bench_csv(&records, header, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<bool, Error> {
    let reports = verify::run(&a.suite, cli.seed)?;
    let mut w = output(&cli.out, false)?;
    verify::write_report(&reports, &mut w)?;
    w.flush()?;
    for r in reports.iter().filter(|r| !r.passed()) {
        eprintln!("{} failed: {}", r.name, r.counterexample.as_deref().unwrap_or("?"));
    }
    Ok(reports.iter().all(|r| r.passed()))
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let Format::Csv = cli.format;
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a)?,
        Command::Profile(a) => cmd_profile(cli, a)?,
        Command::Plan(a) => cmd_plan(cli, a)?,
        Command::Build(a) => cmd_build(cli, a)?,
        Command::Query(a) => cmd_query(cli, a)?,
        Command::Bench(a) => cmd_bench(cli, a)?,
        Command::Verify(a) => return cmd_verify(cli, a),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
