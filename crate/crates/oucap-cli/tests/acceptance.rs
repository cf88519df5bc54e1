//! CLI acceptance: determinism of `selftest` records (the result bytes of
//! repeated runs with one seed are identical once the metadata field is set
//! aside) plus the documented exit codes and the config round trip.

use std::path::Path;
use std::process::Command;

fn oucap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oucap"))
}

/// Result bytes with the trailing `meta` object cut off; everything before
/// it must be byte-identical between runs.
fn strip_meta(bytes: &[u8]) -> &[u8] {
    let text = std::str::from_utf8(bytes).expect("records are UTF-8");
    let cut = text.find(",\"meta\":").expect("records carry a meta field");
    &bytes[..cut]
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn criterion_11_selftest_determinism() {
    let temp = std::env::temp_dir().join(format!("oucap-acc-{}", std::process::id()));
    let (dir_a, dir_b) = (temp.join("a"), temp.join("b"));
    for dir in [&dir_a, &dir_b] {
        let status = oucap()
            .args(["selftest", "--seed", "11", "--quiet", "--out"])
            .arg(dir)
            .status()
            .expect("binary runs");
        assert!(status.success(), "selftest exit code {status:?}");
    }
    let a = read(&dir_a, "selftest.json");
    let b = read(&dir_b, "selftest.json");
    assert!(!a.is_empty());
    assert_eq!(
        strip_meta(&a),
        strip_meta(&b),
        "selftest result bytes differ between identical runs"
    );
    std::fs::remove_dir_all(&temp).ok();
    println!("acceptance 11 selftest determinism: PASS ({} result bytes)", strip_meta(&a).len());
}

#[test]
fn validation_errors_exit_2() {
    let temp = std::env::temp_dir().join(format!("oucap-exit2-{}", std::process::id()));
    std::fs::create_dir_all(&temp).unwrap();

    // missing required section
    let status = oucap()
        .args(["capacity", "--quiet", "--out"])
        .arg(&temp)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // unknown field rejected
    let bad = temp.join("bad.toml");
    std::fs::write(&bad, "[space]\ndim = 1\nmax_degree = 4\nquad_order = 7\nbogus = 1\n").unwrap();
    let status = oucap()
        .args(["capacity", "--quiet", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(&temp)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&temp).ok();
}

#[test]
fn capacity_config_round_trip() {
    let temp = std::env::temp_dir().join(format!("oucap-rt-{}", std::process::id()));
    let first = temp.join("first");
    let second = temp.join("second");
    std::fs::create_dir_all(&temp).unwrap();
    let config = temp.join("capacity.toml");
    std::fs::write(
        &config,
        r#"
seed = 3

[space]
dim = 1
max_degree = 8
quad_order = 13

[sobolev]
r = 2
p = 2.0

[region]
kind = "ball"
center = [0.0]
radius = 1.0
"#,
    )
    .unwrap();

    let status = oucap()
        .args(["capacity", "--quiet", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&first)
        .status()
        .unwrap();
    assert!(status.success());

    // the materialized config re-runs to identical results
    let status = oucap()
        .args(["capacity", "--quiet", "--config"])
        .arg(first.join("capacity_config.toml"))
        .arg("--out")
        .arg(&second)
        .status()
        .unwrap();
    assert!(status.success());

    let a = read(&first, "capacity.json");
    let b = read(&second, "capacity.json");
    assert_eq!(strip_meta(&a), strip_meta(&b), "config round trip changed the result");
    std::fs::remove_dir_all(&temp).ok();
}

#[test]
fn solver_non_convergence_exits_3() {
    let temp = std::env::temp_dir().join(format!("oucap-exit3-{}", std::process::id()));
    std::fs::create_dir_all(&temp).unwrap();
    let config = temp.join("starved.toml");
    // a one-iteration budget cannot reach the stopping rule on a
    // nontrivial general-p problem
    std::fs::write(
        &config,
        r#"
[space]
dim = 1
max_degree = 8
quad_order = 13

[sobolev]
r = 2
p = 1.5

[region]
kind = "ball"
center = [0.0]
radius = 1.0

[solver]
definition = "potential"
max_iterations = 1
rel_change_tol = 1e-12
"#,
    )
    .unwrap();
    let status = oucap()
        .args(["capacity", "--quiet", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&temp)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    std::fs::remove_dir_all(&temp).ok();
}

#[test]
fn uniqueness_condition_failure_still_exits_zero() {
    let temp = std::env::temp_dir().join(format!("oucap-uniq-{}", std::process::id()));
    std::fs::create_dir_all(&temp).unwrap();
    let config = temp.join("uniq.toml");
    std::fs::write(
        &config,
        r#"
[space]
dim = 1
max_degree = 8
quad_order = 13

[uniqueness]
m = 2
p = 10.0

[uniqueness.set]
kind = "empty"
"#,
    )
    .unwrap();
    let output = oucap()
        .args(["uniqueness", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&temp)
        .output()
        .unwrap();
    assert!(output.status.success());
    let record = read(&temp, "uniqueness.json");
    let text = String::from_utf8(record).unwrap();
    assert!(
        text.contains("generation condition fails"),
        "verdict missing from {text}"
    );
    std::fs::remove_dir_all(&temp).ok();
}
