use std::path::{Path, PathBuf};

use mpa_cli::{run, EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION};

const SCENARIO: &str = r#"
name = "reference"

[bio]
r1 = 0.4
r2 = 0.05
r = 0.28739
alpha = 0.5

[econ]
p = 0.3
q = 2.0
c = 0.15
delta = 0.05

[diffusion]
mode = "constant"
lambda = 20.0

[simulation]
x1_0 = 0.2
x2_0 = 0.1
horizon = 10.0
step = 0.01
effort = 0.05
"#;

fn invoke(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut argv = vec!["mpa"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn scenario_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn global_equilibrium_csv_on_builtin_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eq.csv");
    let (code, out) = invoke(&["equilibrium", "--model", "global", "--csv", s(&csv)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("x1_star      0.87500000"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.split('\n');
    assert_eq!(
        lines.next().unwrap(),
        "x1_star,x2_star,E_star,lambda_star,J_star,normal,profitable,feasible"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 0.875);
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.125);
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
    assert!(!text.contains('\r'));
}

#[test]
fn patches_csv_leaves_missing_lambda_empty() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eq.csv");
    assert_eq!(
        invoke(&["equilibrium", "--model", "patches", "--csv", s(&csv)]).0,
        EXIT_OK
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "");
    assert_eq!(row[0], "2.1875000000000000e-1");
    assert_eq!(row[7], "false");
}

#[test]
fn check_reports_not_normal_with_threshold_and_bound() {
    let (code, out) = invoke(&["check"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("not_normal"));
    assert!(out.contains("theta = pq/c                  4.00000000"));
    assert!(out.contains("3.75510204"));
    assert!(out.contains("0.02040816"));
}

#[test]
fn scenario_file_drives_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(dir.path(), "ref.toml", SCENARIO);
    let traj = dir.path().join("traj.csv");
    for args in [
        vec!["equilibrium", "--scenario", s(&path), "--model", "patches"],
        vec!["check", "--scenario", s(&path)],
        vec!["calibrate", "--scenario", s(&path)],
        vec!["compare", "--scenario", s(&path)],
        vec!["alpha-sweep", "--scenario", s(&path), "--points", "3"],
        vec!["simulate", "--scenario", s(&path), "--out", s(&traj)],
    ] {
        let (code, out) = invoke(&args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        assert!(out.contains("scenario: reference"), "{args:?}");
    }
    let text = std::fs::read_to_string(&traj).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,E,rent,discounted_rent");
    assert_eq!(lines.count(), 1001);
}

#[test]
fn simulate_model_override_and_discounting() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(dir.path(), "ref.toml", SCENARIO);
    let traj = dir.path().join("traj.csv");
    let (code, _) = invoke(&[
        "simulate",
        "--scenario",
        s(&path),
        "--model",
        "global-open",
        "--out",
        s(&traj),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&traj).unwrap();
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(last[0], 10.0);
    let expected = (-0.05f64 * 10.0).exp() * last[4];
    assert!((last[5] - expected).abs() <= 1e-15);
}

#[test]
fn alpha_sweep_grid_and_size_dependent_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let (code, _) = invoke(&["alpha-sweep", "--points", "4", "--csv", s(&csv)]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let alphas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(alphas, vec![0.2, 0.4, 0.6, 0.8]);
    // lambda0 = 20 / 0.25 = 80, so lambda(0.2) = 80 * 0.16
    let lambda: f64 = rows[0][1].parse().unwrap();
    assert!((lambda - 12.8).abs() < 1e-12);
}

#[test]
fn reproduce_paper_labels_price_and_flags_deviations() {
    let (code, out) = invoke(&["reproduce-paper"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("p = 0.3 is REVERSE-ENGINEERED"));
    let x1 = out.lines().find(|l| l.starts_with("patches x1*")).unwrap();
    assert!(x1.contains("exact"));
    let x2 = out.lines().find(|l| l.starts_with("patches x2*")).unwrap();
    assert!(x2.contains("DEVIATES"));
}

#[test]
fn quiet_suppresses_tables_but_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("audit.csv");
    let (code, out) = invoke(&["--quiet", "reproduce-paper", "--csv", s(&csv)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("quantity,published,computed"));
}

#[test]
fn run_record_json_has_digest_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("record.json");
    assert_eq!(invoke(&["check", "--out", s(&json)]).0, EXIT_OK);
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"tool_version\""));
    assert!(text.contains("\"scenario_digest\""));
    assert!(text.contains("\"not_normal\""));
}

#[test]
fn invalid_share_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(
        dir.path(),
        "bad.toml",
        &SCENARIO.replace("alpha = 0.5", "alpha = 1.2"),
    );
    assert_eq!(
        invoke(&["check", "--scenario", s(&path)]).0,
        EXIT_VALIDATION
    );
}

#[test]
fn unknown_key_and_bad_model_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(
        dir.path(),
        "bad.toml",
        &SCENARIO.replace("q = 2.0", "q = 2.0\nprice = 1.0"),
    );
    assert_eq!(
        invoke(&["check", "--scenario", s(&path)]).0,
        EXIT_VALIDATION
    );
    assert_eq!(
        invoke(&["equilibrium", "--model", "lagoon"]).0,
        EXIT_VALIDATION
    );
    assert_eq!(
        invoke(&["check", "--scenario", "/nonexistent/file.toml"]).0,
        EXIT_VALIDATION
    );
    assert_eq!(invoke(&["no-such-command"]).0, EXIT_VALIDATION);
}

#[test]
fn simulate_without_setup_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    assert_eq!(invoke(&["simulate", "--out", s(&traj)]).0, EXIT_VALIDATION);
}

#[test]
fn diverging_simulation_exits_with_solver_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = SCENARIO
        .replace("lambda = 20.0", "lambda = 1e6")
        .replace("step = 0.01", "step = 0.1")
        .replace("effort = 0.05", "effort = 0.0");
    let path = scenario_file(dir.path(), "stiff.toml", &text);
    let traj = dir.path().join("traj.csv");
    assert_eq!(
        invoke(&["simulate", "--scenario", s(&path), "--out", s(&traj)]).0,
        EXIT_SOLVER
    );
}

#[test]
fn help_exits_cleanly() {
    let (code, out) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("reproduce-paper"));
}
