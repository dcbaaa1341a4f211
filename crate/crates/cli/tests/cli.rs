use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gvcov");

fn gvcov(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("gvcov runs")
}

fn scenario(dir: &Path, name: &str, agents: &str, extra: &str) -> PathBuf {
    let text = format!(
        r#"[region]
vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]

[agents]
{agents}

[radii]
r_u = 0.05
r_s = 0.3
{extra}"#
    );
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for name in ["case_study_1.toml", "case_study_2.toml", "randomized.toml"] {
        let out = gvcov(&["validate", shipped(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", text(&out.stderr));
        assert!(text(&out.stdout).contains("ok (10 agents") || name == "randomized.toml");
    }
}

#[test]
fn validate_rejects_bad_radii_with_field_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "bad.toml", "centers = [[0.5, 0.5]]", "");
    let bad = std::fs::read_to_string(&path)
        .unwrap()
        .replace("r_s = 0.3", "r_s = 0.04");
    std::fs::write(&path, bad).unwrap();
    let out = gvcov(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("line 9: radii.r_s"), "{err}");
}

#[test]
fn missing_file_is_a_validation_error() {
    let out = gvcov(&["validate", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(gvcov(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gvcov(&["run"]).status.code(), Some(1));
    assert_eq!(
        gvcov(&["run", "x.toml", "--law", "lazy"]).status.code(),
        Some(1)
    );
    assert_eq!(gvcov(&["--help"]).status.code(), Some(0));
}

#[test]
fn diagram_of_one_agent_is_the_whole_region() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "one.toml", "centers = [[0.4, 0.6]]", "");
    let svg = dir.path().join("one.svg");
    let out = gvcov(&[
        "diagram",
        path.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let body = std::fs::read_to_string(&svg).unwrap();
    let cells: Vec<&str> = body
        .lines()
        .filter(|l| l.contains(r#"class="cell""#))
        .collect();
    let region: Vec<&str> = body
        .lines()
        .filter(|l| l.contains(r#"class="region""#))
        .collect();
    assert_eq!(cells.len(), 1);
    let d = |line: &str| line.split(" d=").nth(1).unwrap().to_string();
    assert_eq!(d(cells[0]), d(region[0]));
}

#[test]
fn run_writes_trace_coverage_and_frames() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(
        dir.path(),
        "pair.toml",
        "centers = [[0.2, 0.2], [0.35, 0.2]]",
        "\n[simulation]\nmax_steps = 40\n\n[outputs]\ndir = \"results\"\n",
    );
    let out = gvcov(&[
        "run",
        path.to_str().unwrap(),
        "--law",
        "full",
        "--svg-every",
        "10",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(
        stdout.contains("40 steps") && stdout.contains("collision free: true"),
        "{stdout}"
    );

    let results = dir.path().join("results");
    let trace = std::fs::read_to_string(results.join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 41);
    assert_eq!(
        lines[0],
        "step,t,x_0,y_0,ux_0,uy_0,x_1,y_1,ux_1,uy_1,H,coverage_fraction,neutral_area,min_pairwise_dist"
    );
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 14));
    let h: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(10).unwrap().parse().unwrap())
        .collect();
    assert!(h.windows(2).all(|w| w[1] >= w[0] - 1e-9));

    assert!(results.join("coverage.csv").exists());
    for name in [
        "initial.svg",
        "final.svg",
        "frame_00010.svg",
        "frame_00040.svg",
    ] {
        assert!(results.join(name).exists(), "{name}");
    }
}

#[test]
fn run_honors_out_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "solo.toml", "centers = [[0.5, 0.5]]", "");
    let out_dir = dir.path().join("elsewhere");
    let out = gvcov(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("converged"));
    assert!(out_dir.join("trace.csv").exists() && out_dir.join("final.svg").exists());
    assert!(!dir.path().join("out").exists());
}
