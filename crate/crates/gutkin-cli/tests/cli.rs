//! Process-level tests of the binary: exit codes, determinism, provenance
//! preambles, and the degree conversion flag.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gutkin-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(BIN).args(args).env(key, value).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const SPHERE3: &str = r#"{"type":"sphere","d":3,"radius":1.0}"#;
const PROBE35: &str = r#"{"type":"support2d","r0":1.0,"harmonics":[{"n":3,"a":0.05}]}"#;

#[test]
fn solve_delta_reports_roots_with_provenance() {
    let out = run(&["solve-delta", "--n", "4"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["version"], "0.1.0");
    assert_eq!(doc["config"]["command"], "solve-delta");
    assert_eq!(doc["config"]["n"], 4);
    let roots = doc["report"].as_array().unwrap();
    assert!(!roots.is_empty());
    let delta = roots[0]["delta"].as_f64().unwrap();
    assert!(delta > std::f64::consts::FRAC_PI_4);
    assert!(roots[0]["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn identical_config_and_seed_give_byte_identical_reports() {
    let args = ["defect", "--body", SPHERE3, "--delta", "0.7", "--samples", "300", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "defect", "--body", SPHERE3, "--delta", "0.7", "--samples", "300", "--seed", "8",
    ]);
    assert_ne!(a.stdout, c.stdout, "seed change must reach the report");
}

#[test]
fn worker_count_does_not_change_the_bytes() {
    let args = ["defect", "--body", SPHERE3, "--delta", "0.5", "--samples", "400", "--seed", "3"];
    let one = run_with_env(&args, "GUTKIN_LAB_THREADS", "1");
    let four = run_with_env(&args, "GUTKIN_LAB_THREADS", "4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn degrees_flag_matches_the_radian_spelling() {
    // 30 degrees converts to the double nearest pi/6; spelling that value
    // out in radians must give the identical report.
    let deg = run(&["defect", "--curve", PROBE35, "--delta", "30", "--degrees", "--samples", "200"]);
    let rad = run(&[
        "defect", "--curve", PROBE35, "--delta", "0.5235987755982988", "--samples", "200",
    ]);
    assert!(deg.status.success());
    assert_eq!(deg.stdout, rad.stdout);
}

#[test]
fn csv_reports_carry_version_and_config_comments() {
    let out = run(&[
        "orbit", "--body", SPHERE3, "--delta", "0.6", "--steps", "3", "--start", "1,0,0",
        "--tangent", "0,1,0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# version: 0.1.0");
    let config_line = lines.next().unwrap();
    assert!(config_line.starts_with("# config: {"));
    assert!(config_line.contains("\"command\":\"orbit\""));
    assert_eq!(lines.next().unwrap(), "step,x,y,z,length,launch_angle,arrival_angle,defect");
}

#[test]
fn failed_characterization_still_writes_the_report_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let out = run(&[
        "characterize",
        "--bodies",
        r#"[{"type":"ellipsoid","semi_axes":[1.1,1.0,1.0]}]"#,
        "--delta-grid",
        "0.5",
        "--samples",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["report"]["pass"], false);
}

#[test]
fn config_errors_name_the_field_and_exit_one() {
    let bad_json = run(&["defect", "--body", r#"{"type":"sphere","d":3,"radius":}"#, "--delta", "0.5"]);
    assert_eq!(bad_json.status.code(), Some(1));
    let msg = stderr(&bad_json);
    assert!(msg.contains("--body"), "missing flag name in: {msg}");
    assert!(msg.contains("line 1"), "missing line number in: {msg}");

    let bad_delta = run(&["defect", "--body", SPHERE3, "--delta", "1.6"]);
    assert_eq!(bad_delta.status.code(), Some(1));
    assert!(stderr(&bad_delta).contains("--delta"));

    let missing = run(&["lemmas", "--curve", "no_such_file.json", "--delta", "0.5"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("no_such_file.json"));

    let bad_threads =
        run_with_env(&["solve-delta", "--n", "4"], "GUTKIN_LAB_THREADS", "zero");
    assert_eq!(bad_threads.status.code(), Some(1));
    assert!(stderr(&bad_threads).contains("GUTKIN_LAB_THREADS"));
}

#[test]
fn specs_load_from_files_too() {
    let dir = tempfile::tempdir().unwrap();
    let body_path = dir.path().join("sphere.json");
    fs::write(&body_path, SPHERE3).unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "defect",
        "--body",
        body_path.to_str().unwrap(),
        "--delta",
        "0.7",
        "--samples",
        "200",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(doc["report"]["max_defect"].as_f64().unwrap() < 1e-9);
    let inline = run(&["defect", "--body", SPHERE3, "--delta", "0.7", "--samples", "200"]);
    assert_eq!(
        fs::read_to_string(&out_path).unwrap(),
        stdout(&inline),
        "file and inline specs must produce identical reports"
    );
}

#[test]
fn lemma_suite_passes_on_probe_and_reports_all_checks() {
    let out = run(&["lemmas", "--curve", PROBE35, "--delta", "0.6"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reports = doc["report"].as_array().unwrap();
    assert_eq!(reports.len(), 6);
    for r in reports {
        assert_eq!(r["pass"], true, "failing check: {r}");
        for key in ["lemma", "curve", "delta", "grid", "worst_error", "pass"] {
            assert!(!r[key].is_null(), "missing key {key}");
        }
    }
}

#[test]
fn scaling_csv_ends_with_the_fitted_slope() {
    let out = run(&[
        "scaling", "--n", "5", "--delta", "0.5", "--eps", "1e-3,2e-3,4e-3", "--samples", "300",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().nth(2).unwrap().starts_with("eps,rms_defect"));
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("# fitted_slope = "), "footer was: {footer}");
    let slope: f64 = footer.trim_start_matches("# fitted_slope = ").parse().unwrap();
    assert!((0.8..1.2).contains(&slope), "generic-angle slope was {slope}");
}

#[test]
fn geodesic_csv_writes_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("arc.csv");
    let out = run(&[
        "geodesic",
        "--body",
        r#"{"type":"ellipsoid","semi_axes":[2.0,1.0,0.8]}"#,
        "--start",
        "0,1,0",
        "--dir",
        "1,0,0",
        "--length",
        "0.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(Path::new(&path)).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("s,x,y,z,k,tau"));
}
