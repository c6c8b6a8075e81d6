use std::path::Path;
use std::process::{Command, Output};

fn dlsh(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlsh"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run dlsh")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen_lattice(dir: &Path, n: &str) {
    let o = dlsh(&["gen", "--kind", "lattice", "-n", n, "-d", "2", "--gap", "2", "--out", "lat.bin"], dir);
    assert!(o.status.success(), "{o:?}");
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.bin", "b.bin"] {
        let o = dlsh(&["gen", "--kind", "uniform-cube", "-n", "100", "-d", "3", "--seed", "4", "--out", name], dir.path());
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), "n=100 d=3 metric=l2");
    }
    let a = std::fs::read(dir.path().join("a.bin")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.bin")).unwrap());
    assert_eq!(a.len(), 28 + 8 * 300);
}

#[test]
fn lattice_csv_has_requested_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlsh(&["gen", "--kind", "lattice", "-n", "100", "-d", "2", "--gap", "2", "--out", "lat.csv"], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("lat.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 100);
}

#[test]
fn profile_reports_dispersion() {
    let dir = tempfile::tempdir().unwrap();
    gen_lattice(dir.path(), "2500");
    let o = dlsh(&["profile", "lat.bin", "--beta-max", "4"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("beta,n_beta,n,r\n"));
    let c: f64 = text
        .lines()
        .find(|l| l.starts_with("# c_epsilon"))
        .and_then(|l| l.rsplit(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(c >= 1.9);
}

#[test]
fn profile_of_one_point_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    gen_lattice(dir.path(), "1");
    let o = dlsh(&["profile", "lat.bin"], dir.path());
    let text = stdout(&o);
    assert!(text.lines().skip(1).filter(|l| !l.starts_with('#')).all(|l| l.split(',').nth(1) == Some("0")));
}

#[test]
fn refined_plan_beats_classical_on_lattice() {
    let dir = tempfile::tempdir().unwrap();
    gen_lattice(dir.path(), "2500");
    let o = dlsh(&["plan", "lat.bin", "--alpha", "2"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let cost = |mode: &str| -> f64 {
        let row = text.lines().find(|l| l.starts_with(mode)).unwrap();
        row.split(',').nth(9).unwrap().parse().unwrap()
    };
    assert!(cost("refined_dim,") < cost("classical,"));

    let o = dlsh(&["plan", "lat.bin", "--alpha", "1", "--mode", "refined"], dir.path());
    let exponent: f64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(10).unwrap().parse().unwrap();
    assert!(exponent < 1.0);
}

#[test]
fn build_query_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    gen_lattice(dir.path(), "900");
    let o = dlsh(&["build", "lat.bin", "--mode", "classical", "--out", "lat.dlsx"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let o = dlsh(&["query", "lat.bin", "--index", "lat.dlsx", "--planted", "50"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 51);
    let found = text.lines().skip(1).filter(|l| l.split(',').nth(1) == Some("1")).count();
    assert!(found >= 40);
}

#[test]
fn bench_appends_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    gen_lattice(dir.path(), "900");
    let args = ["bench", "lat.bin", "--queries", "100", "--seed", "3", "--out"];
    for out in ["a.csv", "b.csv"] {
        let mut a = args.to_vec();
        a.push(out);
        assert!(dlsh(&a, dir.path()).status.success());
    }
    let strip = |name: &str| -> Vec<String> {
        std::fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string())
            .collect()
    };
    assert_eq!(strip("a.csv"), strip("b.csv"));
    assert_eq!(strip("a.csv").len(), 4);

    let mut again = args.to_vec();
    again.push("a.csv");
    assert!(dlsh(&again, dir.path()).status.success());
    let rows = strip("a.csv");
    assert_eq!(rows.len(), 7);
    assert_eq!(rows.iter().filter(|l| l.starts_with("dataset,")).count(), 1);
    for row in &rows[1..] {
        let recall: f64 = row.split(',').nth(7).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&recall));
    }
}

#[test]
fn bench_with_zero_queries_prints_header() {
    let dir = tempfile::tempdir().unwrap();
    gen_lattice(dir.path(), "100");
    let o = dlsh(&["bench", "lat.bin", "--queries", "0"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn verify_exit_codes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dlsh(&["verify", "graph", "--seed", "5"], dir.path());
    let b = dlsh(&["verify", "graph", "--seed", "5"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("graph,2000,0,pass"));
    assert_eq!(dlsh(&["verify", "nonsense"], dir.path()).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dlsh(&["plan"], dir.path()).status.code(), Some(2));
    assert_eq!(dlsh(&["gen", "--kind", "lattice", "-n", "5", "-d", "2"], dir.path()).status.code(), Some(2));
    assert_eq!(dlsh(&["profile", "missing.bin"], dir.path()).status.code(), Some(2));
}
