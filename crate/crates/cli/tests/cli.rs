//! End-to-end tests of the `lmc` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lmc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "command failed: {}",
        stderr(output)
    );
}

const TRIANGLE: &str = "lmp 1\nn 3\ne 0 1 2.000000000\ne 0 2 2.000000000\ne 1 2 -1.000000000\n";

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

#[test]
fn solve_triangle_exact_reports_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.lmp", TRIANGLE);
    let out = lmc(
        dir.path(),
        &["solve", "--problem", "tri.lmp", "--solver", "exact", "--out", "tri.lab"],
    );
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("energy=0.000000000"), "stdout: {text}");
    assert_eq!(
        fs::read_to_string(dir.path().join("tri.lab")).unwrap(),
        "0 0\n1 0\n2 0\n"
    );
}

#[test]
fn eval_identical_labelings_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.lab", "0 0\n1 0\n2 1\n");
    write(dir.path(), "b.lab", "0 5\n1 5\n2 9\n");
    let out = lmc(dir.path(), &["eval", "--gt", "a.lab", "--seg", "b.lab"]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("vi_split=0.000000000"));
    assert!(text.contains("vi_merge=0.000000000"));
    assert!(text.contains("rand_error=0.000000000"));
}

#[test]
fn eval_supports_base_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "gt.lab", "0 0\n1 0\n2 1\n3 1\n");
    write(dir.path(), "seg.lab", "0 0\n1 0\n2 0\n3 0\n");
    let out = lmc(
        dir.path(),
        &["eval", "--gt", "gt.lab", "--seg", "seg.lab", "--log-base", "2"],
    );
    assert_success(&out);
    assert!(stdout(&out).contains("vi_merge=1.000000000"));
}

#[test]
fn resolve_without_flagged_objects_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "chain.lmp",
        "lmp 1\nn 3\ne 0 1 10.000000000\ne 1 2 10.000000000\n",
    );
    write(dir.path(), "seg.lab", "0 0\n1 0\n2 0\n");
    write(dir.path(), "paths.txt", "0.200000000 0 1 2\n");
    let out = lmc(
        dir.path(),
        &[
            "resolve", "--problem", "chain.lmp", "--labeling", "seg.lab", "--paths",
            "paths.txt", "--threshold", "0.5", "--out", "res.lab",
        ],
    );
    assert_success(&out);
    assert!(stdout(&out).contains("flagged_objects=0"));
    assert_eq!(
        fs::read(dir.path().join("seg.lab")).unwrap(),
        fs::read(dir.path().join("res.lab")).unwrap()
    );
}

#[test]
fn resolve_splits_flagged_false_merge() {
    let dir = tempfile::tempdir().unwrap();
    // two triangles joined by one attractive bridge
    write(
        dir.path(),
        "merged.lmp",
        concat!(
            "lmp 1\nn 6\n",
            "e 0 1 3.000000000\ne 0 2 3.000000000\ne 1 2 3.000000000\n",
            "e 2 3 2.500000000\n",
            "e 3 4 3.000000000\ne 3 5 3.000000000\ne 4 5 3.000000000\n",
        ),
    );
    write(dir.path(), "seg.lab", "0 0\n1 0\n2 0\n3 0\n4 0\n5 0\n");
    write(dir.path(), "paths.txt", "0.950000000 0 2 3 5\n0.950000000 1 2 3 4\n");
    let out = lmc(
        dir.path(),
        &[
            "resolve", "--problem", "merged.lmp", "--labeling", "seg.lab", "--paths",
            "paths.txt", "--threshold", "0.5", "--out", "res.lab",
        ],
    );
    assert_success(&out);
    assert!(stdout(&out).contains("flagged_objects=1"));
    let resolved = fs::read_to_string(dir.path().join("res.lab")).unwrap();
    assert_eq!(resolved, "0 0\n1 0\n2 0\n3 1\n4 1\n5 1\n");
}

#[test]
fn resolve_object_scope_preserves_outside_objects() {
    let dir = tempfile::tempdir().unwrap();
    // objects: {0,1} (flagged), {2,3} (untouched)
    write(
        dir.path(),
        "p.lmp",
        "lmp 1\nn 4\ne 0 1 1.000000000\ne 1 2 -5.000000000\ne 2 3 4.000000000\n",
    );
    write(dir.path(), "seg.lab", "0 0\n1 0\n2 1\n3 1\n");
    write(dir.path(), "paths.txt", "0.990000000 0 1\n");
    let out = lmc(
        dir.path(),
        &[
            "resolve", "--problem", "p.lmp", "--labeling", "seg.lab", "--paths", "paths.txt",
            "--threshold", "0.5", "--out", "res.lab",
        ],
    );
    assert_success(&out);
    let resolved = fs::read_to_string(dir.path().join("res.lab")).unwrap();
    // nodes 2 and 3 still share a component of their own
    assert_eq!(resolved, "0 0\n1 1\n2 2\n3 2\n");
}

#[test]
fn lift_dense_adds_candidates() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "path.lmp",
        "lmp 1\nn 4\ne 0 1 1.000000000\ne 1 2 1.000000000\ne 2 3 1.000000000\n",
    );
    let out = lmc(
        dir.path(),
        &[
            "lift", "--problem", "path.lmp", "--mode", "dense", "--max-distance", "2",
            "--weight", "0.25", "--out", "dense.lmp",
        ],
    );
    assert_success(&out);
    assert!(stdout(&out).contains("added=2"));
    let text = fs::read_to_string(dir.path().join("dense.lmp")).unwrap();
    assert!(text.contains("l 0 2 0.250000000"));
    assert!(text.contains("l 1 3 0.250000000"));
}

#[test]
fn lift_components_folds_adjacent_pairs() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "p.lmp",
        "lmp 1\nn 3\ne 0 1 1.000000000\ne 1 2 1.000000000\n",
    );
    write(dir.path(), "attr.txt", "0 0\n1 0\n");
    let out = lmc(
        dir.path(),
        &[
            "lift", "--problem", "p.lmp", "--mode", "components", "--attribution", "attr.txt",
            "--attractive", "3", "--repulsive", "1", "--out", "out.lmp",
        ],
    );
    assert_success(&out);
    let text = fs::read_to_string(dir.path().join("out.lmp")).unwrap();
    // the (0,1) pair is adjacent, so its weight folds into the local edge
    assert!(text.contains("e 0 1 4.000000000"), "{text}");
    assert!(stdout(&out).contains("lifted_total=0"));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cfg.toml",
        "grid = [3, 3, 2]\nobjects = 2\nboundary_noise = 0.2\nseed = 13\n",
    );
    for (problem, gt) in [("a.lmp", "a.lab"), ("b.lmp", "b.lab")] {
        let out = lmc(
            dir.path(),
            &["gen", "--config", "cfg.toml", "--out", problem, "--gt", gt],
        );
        assert_success(&out);
    }
    assert_eq!(
        fs::read(dir.path().join("a.lmp")).unwrap(),
        fs::read(dir.path().join("b.lmp")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("a.lab")).unwrap(),
        fs::read(dir.path().join("b.lab")).unwrap()
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = lmc(dir.path(), &["solve", "--problem", "x.lmp", "--nope"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "stderr: {err}");
    assert!(err.starts_with("error: "));

    // missing mode flags are usage errors too
    write(dir.path(), "p.lmp", "lmp 1\nn 1\n");
    let out = lmc(
        dir.path(),
        &["lift", "--problem", "p.lmp", "--mode", "class", "--out", "o.lmp"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.lmp", "lmp 1\nn 3\ne 0 nope 1\n");
    let out = lmc(
        dir.path(),
        &["solve", "--problem", "bad.lmp", "--solver", "gaec", "--out", "seg.lab"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("line 3"), "stderr: {err}");
    assert!(!dir.path().join("seg.lab").exists());

    // exact solver refuses oversized problems with a data error
    let n = 20;
    let mut text = format!("lmp 1\nn {n}\n");
    for i in 0..n - 1 {
        text.push_str(&format!("e {} {} 1.000000000\n", i, i + 1));
    }
    write(dir.path(), "big.lmp", &text);
    let out = lmc(
        dir.path(),
        &["solve", "--problem", "big.lmp", "--solver", "exact", "--out", "seg.lab"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("seg.lab").exists());
}

#[test]
fn solve_outputs_are_parsable_key_values() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.lmp", TRIANGLE);
    let out = lmc(
        dir.path(),
        &["solve", "--problem", "tri.lmp", "--solver", "gaec", "--out", "t.lab"],
    );
    assert_success(&out);
    for line in stdout(&out).lines() {
        let (key, value) = line.split_once('=').expect("key=value line");
        assert!(!key.is_empty() && !value.is_empty());
    }
}
