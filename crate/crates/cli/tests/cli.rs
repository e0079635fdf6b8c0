use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paraxial"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn validate_reports_and_sets_exit_status() {
    let d = tempfile::tempdir().unwrap();
    let ok = run(&["validate", "--set", "alpha=0.05"], d.path());
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("Pass"));

    let warn = run(&["validate", "--set", "theta=0.8"], d.path());
    assert!(warn.status.success());
    assert!(String::from_utf8_lossy(&warn.stdout).contains("Warn"));

    let fail = run(&["validate", "--set", "theta=1.2"], d.path());
    assert_eq!(fail.status.code(), Some(1));

    let sp = run(&["validate", "--set", "geometry=spindle", "--set", "k=200", "--set", "grid=body", "--set", "nodes=10"], d.path());
    assert!(sp.status.success());
    let report: serde_json::Value = serde_json::from_str(&read(d.path(), "validate_report.json")).unwrap();
    let fock = report["max_fock_angle"].as_f64().unwrap();
    assert!((fock - (0.08f64 / 200.0).cbrt()).abs() < 1e-15);
}

#[test]
fn configuration_errors_name_the_field() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--set", "k=-3"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`k`"));
    let o = run(&["solve", "--set", "colour=red"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    let o = run(&["solve", "--set", "geometry=spindle", "--set", "grid=x", "--set", "start=0", "--set", "end=12"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_is_deterministic_and_carries_metadata() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("run.cfg");
    std::fs::write(&cfg, "geometry = cone\nalpha = 0.1\nk = 1000\neta = 0\nend = 5\nnodes = 50\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    assert!(run(&["solve", "--config", cfg], a.path()).status.success());
    assert!(run(&["solve", "--config", cfg, "--threads", "2"], b.path()).status.success());
    let text = read(a.path(), "solve.csv");
    assert_eq!(text, read(b.path(), "solve.csv"));
    assert!(text.starts_with("# program: paraxial"));
    assert!(text.contains("# config_sha256: "));
    assert!(text.contains("# eta: 0.0000000000000000e0"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 51);
    // Tip value of the marching solution: 2U^in.
    assert_eq!(rows[0][3], 2.0);
    let json: serde_json::Value = serde_json::from_str(&read(a.path(), "solve.json")).unwrap();
    assert_eq!(json["metadata"]["command"], "solve");
    assert_eq!(json["rows"].as_array().unwrap().len(), 51);
}

#[test]
fn marching_and_analytic_outputs_agree() {
    let d = tempfile::tempdir().unwrap();
    let common = ["--set", "eta=0", "--set", "start=0", "--set", "end=4", "--set", "nodes=200"];
    let mut args = vec!["solve"];
    args.extend_from_slice(&common);
    assert!(run(&args, d.path()).status.success());
    let mut args = vec!["analytic"];
    args.extend_from_slice(&common);
    assert!(run(&args, d.path()).status.success());
    let m = data_rows(&read(d.path(), "solve.csv"));
    let a = data_rows(&read(d.path(), "analytic.csv"));
    for (mr, ar) in m.iter().zip(&a).skip(20) {
        let err = ((mr[6] - ar[2]).powi(2) + (mr[7] - ar[3]).powi(2)).sqrt();
        assert!(err < 2e-3, "y = {}: {err}", ar[1]);
    }
}

#[test]
fn cone_field_map_matches_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "reconstruct", "--set", "k=100", "--set", "eta=0", "--set", "end=10", "--set", "nodes=200", "--set", "target_x=4,6", "--set", "target_r=0.8,1.0",
    ];
    let o = run(&args, d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let map = data_rows(&read(d.path(), "reconstruct.csv"));
    let closed = data_rows(&read(d.path(), "reconstruct_closed_form.csv"));
    assert_eq!(map.len(), 4);
    for (m, c) in map.iter().zip(&closed) {
        assert_eq!((m[0], m[1]), (c[0], c[1]));
        let err = ((m[3] - c[2]).powi(2) + (m[4] - c[3]).powi(2)).sqrt();
        assert!(err < 2e-2 * c[4].max(0.1), "{m:?} {c:?}");
    }
}

#[test]
fn kernel_table_compares_both_routes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["kernel", "--eta", "0.01", "--set", "x_star=1", "--set", "samples=5", "--set", "grid=x", "--set", "end=2"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for row in data_rows(&read(d.path(), "kernel.csv")) {
        assert!(row[7] < 1e-8, "{row:?}");
    }
}

#[test]
fn spindle_observables_from_the_cli() {
    let d = tempfile::tempdir().unwrap();
    let base = ["--set", "geometry=spindle", "--set", "alpha=0.05", "--set", "k=50", "--set", "eta=0", "--set", "grid=body", "--set", "nodes=60"];
    let mut args = vec!["directivity", "--set", "theta_star=0,0.05"];
    args.extend_from_slice(&base);
    assert!(run(&args, d.path()).status.success());
    let t = data_rows(&read(d.path(), "directivity.csv"));
    assert_eq!(t.len(), 2);
    assert!(t[0][2] < 0.0 && t[0][5] < 1e-4);

    let mut args = vec!["optical-theorem", "--set", "planes=15"];
    args.extend_from_slice(&base);
    let o = run(&args, d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ot = data_rows(&read(d.path(), "optical_theorem.csv"));
    assert!(ot[0][3] < 5e-2, "{:?}", ot[0]);

    let mut args = vec!["reconstruct", "--set", "target_x=12", "--set", "target_r=0.3"];
    args.extend_from_slice(&base);
    assert!(run(&args, d.path()).status.success());
    assert_eq!(data_rows(&read(d.path(), "reconstruct.csv")).len(), 1);

    // Complex k without extrapolation is refused for the energy balance.
    let mut args = vec!["optical-theorem", "--eta", "1e-3"];
    args.extend_from_slice(&base[..6]);
    args.extend_from_slice(&["--set", "grid=body", "--set", "nodes=60"]);
    assert_eq!(run(&args, d.path()).status.code(), Some(2));
}

#[test]
fn presets_emit_their_tables() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(&["preset", "fig4", "--set", "nodes=100"], d.path()).status.success());
    let text = read(d.path(), "fig4.csv");
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("y,abs_sum_1,") && header.ends_with("abs_sum_12,abs_marching"));
    assert_eq!(data_rows(&text).len(), 101);

    assert!(run(&["preset", "penumbra", "--set", "samples=9"], d.path()).status.success());
    let p = data_rows(&read(d.path(), "penumbra.csv"));
    assert_eq!(p.len(), 9);

    let o = run(&["preset", "cone-vs-analytic", "--set", "nodes=100", "--set", "end=5"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = data_rows(&read(d.path(), "cone_vs_analytic.csv"));
    assert!(c[20..].iter().all(|r| r[6] < 1e-2));
    assert!(read(d.path(), "cone_vs_analytic.csv").contains("# extrapolated_from_eta: "));
}
