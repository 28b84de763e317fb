use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use vago_core::io::{parse_ontology, read_feedback, read_updates, serialize_ontology};
use vago_core::learning::{sigmoid_weight, LearningParams};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn vago(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vago"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn validate(dir: &TempDir, training: &str) -> PathBuf {
    let out = dir.path().join("feedback.json");
    let res = vago(&[
        "validate",
        "--ontology",
        s(&data("adult.vago")),
        "--training",
        s(&data(training)),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    out
}

fn learned_x(dir: &TempDir, feedback: &Path, extra: &[&str]) -> Option<f64> {
    let out = dir.path().join("updates.json");
    let adult = data("adult.vago");
    let mut args = vec![
        "learn",
        "--feedback",
        s(feedback),
        "--ontology",
        s(&adult),
        "--out",
        s(&out),
    ];
    args.extend_from_slice(extra);
    let res = vago(&args);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let updates = read_updates(&fs::read_to_string(out).unwrap()).unwrap();
    assert!(updates.len() <= 1);
    updates.first().map(|u| u.new)
}

#[test]
fn validate_writes_one_object_per_person() {
    let dir = TempDir::new().unwrap();
    let fos =
        read_feedback(&fs::read_to_string(validate(&dir, "john_jane.vago")).unwrap()).unwrap();
    let summary: Vec<_> = fos
        .iter()
        .map(|f| (f.was_correct, f.current, f.required))
        .collect();
    assert_eq!(
        summary,
        vec![(true, 18.0, Some(26.0)), (false, 18.0, Some(16.0))]
    );
}

#[test]
fn validate_consistent_input_has_only_correct_objects() {
    let dir = TempDir::new().unwrap();
    let fos =
        read_feedback(&fs::read_to_string(validate(&dir, "consistent.vago")).unwrap()).unwrap();
    assert!(!fos.is_empty());
    assert!(fos.iter().all(|f| f.was_correct));
}

#[test]
fn missing_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let res = vago(&[
        "validate",
        "--ontology",
        "does-not-exist.vago",
        "--training",
        s(&data("jo.vago")),
        "--out",
        s(&dir.path().join("x.json")),
    ]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).starts_with("does-not-exist.vago:1:1: error:"));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn syntax_errors_are_reported_with_positions() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.vago");
    fs::write(&bad, "concept A\ndefine A == and(A,\n").unwrap();
    let res = vago(&[
        "validate",
        "--ontology",
        s(&bad),
        "--training",
        s(&data("jo.vago")),
        "--out",
        s(&dir.path().join("x.json")),
    ]);
    assert_eq!(code(&res), 2);
    let err = stderr(&res);
    assert!(err.starts_with(&format!("{}:2:", bad.display())), "{err}");
}

#[test]
fn learn_defaults_follow_the_inconsistent_evidence() {
    let dir = TempDir::new().unwrap();
    let fb = validate(&dir, "john_jane.vago");
    assert_eq!(learned_x(&dir, &fb, &[]), Some(16.0));
    assert_eq!(
        learned_x(&dir, &fb, &["--update-mode", "absolute"]),
        Some(16.0)
    );
}

#[test]
fn learn_with_consistent_evidence_pools_both_values() {
    let dir = TempDir::new().unwrap();
    let fb = validate(&dir, "john_jane.vago");
    // Pool {16, 26}: mean 21, σ 5, both values 5 away from the mean.
    let l = (1.0 + (5.0f64 * (5.0f64 - 10.0).exp())).powf(-1.0 / 5.0);
    assert!((l - sigmoid_weight(5.0, 5.0, &LearningParams::default())).abs() < 1e-12);
    let got = learned_x(
        &dir,
        &fb,
        &["--include-consistent", "--update-mode", "absolute"],
    );
    assert_eq!(got, Some((21.0 * l).round()));
}

#[test]
fn learn_without_inconsistencies_changes_nothing() {
    let dir = TempDir::new().unwrap();
    let fb = validate(&dir, "consistent.vago");
    assert_eq!(learned_x(&dir, &fb, &[]), None);
    assert_eq!(
        fs::read_to_string(dir.path().join("updates.json")).unwrap(),
        "[]\n"
    );
}

#[test]
fn learn_rejects_unknown_adaptors_and_bad_flags() {
    let dir = TempDir::new().unwrap();
    let fb = dir.path().join("fb.json");
    fs::write(
        &fb,
        r#"[{"adaptor": "Y", "was_correct": false, "current": 1, "required": 2}]"#,
    )
    .unwrap();
    let out = dir.path().join("u.json");
    let adult = data("adult.vago");
    let base = [
        "learn",
        "--feedback",
        s(&fb),
        "--ontology",
        s(&adult),
        "--out",
        s(&out),
    ];
    assert_eq!(code(&vago(&base)), 2);
    fs::write(&fb, "[{\"adaptor\": \"X\",\n \"bogus\": 1}]").unwrap();
    let res = vago(&base);
    assert_eq!(code(&res), 2);
    assert!(
        stderr(&res).contains(&format!("{}:2:", fb.display())),
        "{}",
        stderr(&res)
    );
    let mut args = base.to_vec();
    args.extend(["--q", "0"]);
    assert_eq!(code(&vago(&args)), 2);
}

#[test]
fn apply_changes_only_the_adaptor() {
    let dir = TempDir::new().unwrap();
    let updates = dir.path().join("u.json");
    fs::write(&updates, r#"[{"adaptor": "X", "old": 18, "new": 21}]"#).unwrap();
    let out = dir.path().join("o.vago");
    let res = vago(&[
        "apply",
        "--ontology",
        s(&data("adult.vago")),
        "--updates",
        s(&updates),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let before = parse_ontology(&fs::read_to_string(data("adult.vago")).unwrap())
        .unwrap()
        .ontology;
    let after = parse_ontology(&fs::read_to_string(&out).unwrap())
        .unwrap()
        .ontology;
    assert_eq!(after.adaptor("X").unwrap().current, 21.0);
    assert_eq!(after.axioms(), before.axioms());

    fs::write(&updates, r#"[{"adaptor": "X", "old": 18, "new": 20.5}]"#).unwrap();
    let res = vago(&[
        "apply",
        "--ontology",
        s(&data("adult.vago")),
        "--updates",
        s(&updates),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&res), 2);
}

fn run(dir: &TempDir, ontology: &Path, training: &str) -> (Output, PathBuf) {
    let out = dir.path().join("run.vago");
    let res = vago(&[
        "run",
        "--ontology",
        s(ontology),
        "--training",
        s(&data(training)),
        "--out",
        s(&out),
    ]);
    (res, out)
}

#[test]
fn run_repairs_jo_to_seventeen() {
    let dir = TempDir::new().unwrap();
    let (res, out) = run(&dir, &data("adult.vago"), "jo.vago");
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let o = parse_ontology(&fs::read_to_string(out).unwrap())
        .unwrap()
        .ontology;
    assert_eq!(o.adaptor("X").unwrap().current, 17.0);
    assert!(dir.path().join("run.feedback.json").exists());
    assert!(dir.path().join("run.updates.json").exists());
}

#[test]
fn run_on_consistent_input_returns_the_input() {
    let dir = TempDir::new().unwrap();
    let canonical = dir.path().join("adult.vago");
    let text = serialize_ontology(
        &parse_ontology(&fs::read_to_string(data("adult.vago")).unwrap())
            .unwrap()
            .ontology,
    );
    fs::write(&canonical, &text).unwrap();
    let (res, out) = run(&dir, &canonical, "consistent.vago");
    assert_eq!(code(&res), 0);
    assert_eq!(fs::read_to_string(out).unwrap(), text);
}

#[test]
fn run_equals_the_three_phases_piped() {
    let dir = TempDir::new().unwrap();
    let (res, run_out) = run(&dir, &data("adult.vago"), "john_jane.vago");
    assert_eq!(code(&res), 0);

    let fb = validate(&dir, "john_jane.vago");
    learned_x(&dir, &fb, &[]);
    let piped = dir.path().join("piped.vago");
    let res = vago(&[
        "apply",
        "--ontology",
        s(&data("adult.vago")),
        "--updates",
        s(&dir.path().join("updates.json")),
        "--out",
        s(&piped),
    ]);
    assert_eq!(code(&res), 0);
    assert_eq!(fs::read(run_out).unwrap(), fs::read(piped).unwrap());
    assert_eq!(
        fs::read(dir.path().join("run.feedback.json")).unwrap(),
        fs::read(fb).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("run.updates.json")).unwrap(),
        fs::read(dir.path().join("updates.json")).unwrap()
    );
}

#[test]
fn unrepairable_inconsistency_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let (res, out) = run(&dir, &data("adult.vago"), "unrepairable.vago");
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("unrepairable"));
    assert!(out.exists());
}

#[test]
fn exhausted_branch_budget_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let mut onto = String::from("concept Z\nconcept W\n");
    let mut training = String::from("individual a\n");
    for i in 0..13 {
        onto.push_str(&format!("concept P{i}\nconcept Q{i}\n"));
        training.push_str(&format!("assert not and(P{i}, Q{i})(a)\n"));
    }
    training.push_str("assert Z(a)\nassert W(a)\nassert not and(Z, W)(a)\n");
    let (o, t) = (dir.path().join("o.vago"), dir.path().join("t.vago"));
    fs::write(&o, onto).unwrap();
    fs::write(&t, training).unwrap();
    let res = vago(&[
        "run",
        "--ontology",
        s(&o),
        "--training",
        s(&t),
        "--out",
        s(&dir.path().join("r.vago")),
    ]);
    assert_eq!(code(&res), 3, "{}", stderr(&res));
    assert!(stderr(&res).contains("budget"));
}

#[test]
fn simulate_is_deterministic_and_writes_the_final_ontology() {
    let dir = TempDir::new().unwrap();
    let sim = |name: &str| {
        let out = dir.path().join(name);
        let res = vago(&[
            "simulate",
            "--scenario",
            "parents",
            "--iterations",
            "12",
            "--seed",
            "3",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
        out
    };
    let (a, b) = (sim("a.csv"), sim("b.csv"));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), fs::read(&b).unwrap().as_slice());
    assert!(text.starts_with("# rng: ChaCha8Rng seed=3\niteration,adaptor,value,target\n"));
    assert_eq!(text.lines().count(), 2 + 12);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    let final_onto = parse_ontology(&fs::read_to_string(dir.path().join("a.vago")).unwrap())
        .unwrap()
        .ontology;
    assert_eq!(
        final_onto.adaptor("X2").unwrap().current.to_string(),
        last[2]
    );
}

#[test]
fn simulate_rejects_bad_configuration() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["--scenario", "geo"],
        vec!["--scenario", "weather"],
        vec!["--scenario", "minors", "--schedule", "3:18"],
        vec!["--scenario", "minors", "--fixtures", "."],
        vec!["--scenario", "minors", "--noise", "1.5"],
        vec!["--scenario", "geo", "--fixtures", s(dir.path())],
    ] {
        let mut full = vec!["simulate"];
        full.extend(args.iter().copied());
        full.extend(["--out", s(&out)]);
        let res = vago(&full);
        assert_eq!(code(&res), 2, "{args:?}: {}", stderr(&res));
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&vago(&["validate"])), 2);
    assert_eq!(code(&vago(&["frobnicate"])), 2);
}
