use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn adsmax() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adsmax"))
}

fn reps_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reps")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn run(dir: &Path, body: &str) -> Output {
    let cfg = write_config(dir, body);
    adsmax().arg("run").arg(&cfg).arg("--deterministic").arg("--out").arg(dir.join("out")).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn wrong_zero_count_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"surface": {"type": "octagon8", "subdivision": 1},
            "qdiff": {"zeros": [[0, 1], [5, 2]]},
            "ray": {"t_values": [1.0]},
            "output_dir": "unused"}"#
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("solvability"), "{}", stderr(&o));
}

#[test]
fn report_without_manifest_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = adsmax().arg("report").arg(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_field_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"surface": {"type": "octagon8", "subdivision": 1, "colour": 3}, "output_dir": "x"}"#
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn missing_rep_file_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"spectrum": {"rep_l_path": "nope.json", "rep_r_path": "nope.json", "max_word_length": 2},
            "output_dir": "x"}"#
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.json"), "{}", stderr(&o));
}

#[test]
fn torus_at_t_zero_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"surface": {"type": "torus-validation", "subdivision": 2}, "ray": {"t_values": [0.0, 1.0]}, "output_dir": "x"}"#
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t = 0"), "{}", stderr(&o));
}

#[test]
fn invalid_thread_count_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        r#"{"surface": {"type": "octagon8", "subdivision": 1}, "ray": {"t_values": [1.0]}, "output_dir": "out"}"#,
    );
    let o = adsmax().arg("run").arg(&cfg).env("ADSMAX_THREADS", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ADSMAX_THREADS"), "{}", stderr(&o));
}

#[test]
fn identical_reps_give_exponent_one() {
    let d = tempfile::tempdir().unwrap();
    let rep = reps_dir().join("octagon.json");
    let body = format!(
        r#"{{"spectrum": {{"rep_l_path": {p:?}, "rep_r_path": {p:?}, "max_word_length": 3}}, "output_dir": "x"}}"#,
        p = rep.display().to_string()
    );
    let o = run(d.path(), &body);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("beta-identity ("));
    let s = read_json(&d.path().join("out/spectrum.json"));
    let alpha = s["alpha_hat"].as_f64().unwrap();
    assert_eq!(alpha, 1.0);
    let r = adsmax().arg("report").arg(d.path().join("out")).output().unwrap();
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("ALL PASS"));
}

#[test]
fn fuchsian_point_run() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"surface": {"type": "octagon8", "subdivision": 1}, "ray": {"t_values": [0.0]},
            "entropy": {"word_radius": 4}, "output_dir": "x"}"#
    );
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("lambda<1 (") && l.contains("): PASS")), "{out}");
    let ray = read_json(&d.path().join("out/ray.json"));
    let lambda = ray["records"][0]["lambda_max"].as_f64().unwrap();
    assert!(lambda.abs() < 1e-12, "lambda_max {lambda}");
    let e = read_json(&d.path().join("out/entropy.json"));
    let e_hat = e["estimates"][0]["E_hat"].as_f64().unwrap();
    assert!((e_hat - 1.0).abs() < 0.2, "E_hat {e_hat}");
    let manifest = read_json(&d.path().join("out/manifest.json"));
    assert_eq!(manifest["all_pass"], true);
}

#[test]
fn validate_surface_succeeds() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"surface": {"type": "octagon8", "subdivision": 2}, "output_dir": "x"}"#);
    let o = adsmax().arg("validate-surface").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("62 vertices"), "{}", stdout(&o));
}
