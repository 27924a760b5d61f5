use std::path::PathBuf;
use std::process::{Command, Output};

use bellzoo::bell::Verdict;
use bellzoo::cli::Report;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn bellzoo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellzoo")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Report {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let o = bellzoo(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let report: Report = serde_json::from_str(&text).unwrap();
    // Emitting the parsed report again gives the same bytes.
    assert_eq!(bellzoo::cli::to_json(&report), text);
    report
}

fn analyze(file: &str) -> bellzoo::ClassificationReport {
    match json(&["analyze", &data(file)]) {
        Report::Analyze(r) => r.data.classification,
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn analyze_bundled_files() {
    let c = analyze("animal_acts.json");
    assert_eq!(c.verdict, Verdict::Type2);
    assert!((c.chsh - 2.4197).abs() < 1e-3);

    let c = analyze("uniform.json");
    assert_eq!(c.verdict, Verdict::NoViolation);
    assert_eq!(c.chsh, 0.0);

    let c = analyze("cats.json");
    assert_eq!(c.verdict, Verdict::Type4);
    assert_eq!(c.chsh, 4.0);

    let c = analyze("vessels.json");
    assert_eq!(c.verdict, Verdict::Type3);
    assert_eq!(c.chsh, 4.0);
}

#[test]
fn analyze_text_matches_json() {
    let o = bellzoo(&["analyze", &data("animal_acts.json")]);
    let text = stdout(&o);
    let c = analyze("animal_acts.json");
    assert!(text.contains(&format!("CHSH = {:?}", c.chsh)));
    assert!(text.contains("verdict: Type2"));
    for m in &c.marginal_deviations {
        assert!(text.contains(&format!("deviation {:?}", m.deviation)));
    }
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("bellzoo-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let malformed = dir.join("malformed.json");
    std::fs::write(&malformed, r#"{"tables":{"AB":[[1,0],[0,0]],"AB'":[[1,0],[0,0]],"A'B":[[1,0],[0,0]],"A'B'":[[1,0]]}}"#).unwrap();
    let o = bellzoo(&["analyze", malformed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tables.A'B'"));

    let invalid = dir.join("invalid.json");
    std::fs::write(&invalid, r#"{"tables":{"AB":[[0.7,0.7],[0,0]],"AB'":[[1,0],[0,0]],"A'B":[[1,0],[0,0]],"A'B'":[[1,0],[0,0]]}}"#).unwrap();
    assert_eq!(bellzoo(&["analyze", invalid.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(bellzoo(&["construct", invalid.to_str().unwrap()]).status.code(), Some(3));

    let rounded = dir.join("rounded.json");
    std::fs::write(&rounded, r#"{"tables":{"AB":[[0.5,0.5],[0,0.001]],"AB'":[[1,0],[0,0]],"A'B":[[1,0],[0,0]],"A'B'":[[1,0],[0,0]]}}"#).unwrap();
    assert_eq!(bellzoo(&["analyze", rounded.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(bellzoo(&["analyze", rounded.to_str().unwrap(), "--normalize"]).status.code(), Some(0));

    assert_eq!(bellzoo(&["analyze", dir.join("missing.json").to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bellzoo(&["analyze", &data("cats.json"), "--tol-bell", "-1"]).status.code(), Some(2));
    assert_eq!(bellzoo(&["simulate", "spheres", "--trials", "many"]).status.code(), Some(2));
    assert_eq!(bellzoo(&["simulate", "spheres", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(bellzoo(&["simulate", "teapot"]).status.code(), Some(2));
    assert_eq!(bellzoo(&["construct", &data("cats.json"), "--state", "1,0"]).status.code(), Some(2));

    let o = bellzoo(&["demo", "unicorn"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for name in ["animal-acts", "vessels", "cats", "nonlocal-box", "spheres"] {
        assert!(err.contains(name), "{err}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn demo_texts() {
    let nonlocal = stdout(&bellzoo(&["demo", "nonlocal-box"]));
    assert!(nonlocal.contains("tr(ρB) = 4"));
    assert!(nonlocal.contains("marginal law satisfied"));

    let vessels = stdout(&bellzoo(&["demo", "vessels"]));
    assert!(vessels.contains("CHSH = 4.0"));
    assert!(vessels.contains("marginal law violated"));
    assert!(vessels.contains("verdict: Type3"));

    let animal = stdout(&bellzoo(&["demo", "animal-acts"]));
    for p in ["0.049", "0.630", "0.259", "0.062", "0.593", "0.025", "0.296", "0.086", "0.778", "0.148", "0.099", "0.667"] {
        assert!(animal.contains(&format!("={p}")), "missing {p}");
    }

    for name in ["cats", "spheres"] {
        assert_eq!(bellzoo(&["demo", name]).status.code(), Some(0));
    }
}

#[test]
fn simulate_commands() {
    let Report::Simulate(r) =
        json(&["simulate", "spheres", "--a", "0", "--ap", "90", "--b", "135", "--bp", "45", "--trials", "1000000", "--seed", "7"])
    else {
        panic!("simulate report expected")
    };
    assert!((r.empirical.classification.chsh_max - 2.828).abs() < 0.01);

    let Report::Simulate(r) = json(&["simulate", "spheres", "--a", "0", "--b", "0", "--trials", "1000"]) else {
        panic!("simulate report expected")
    };
    assert_eq!(r.empirical.classification.expectations[0], -1.0);

    let Report::Simulate(r) = json(&["simulate", "vessels-box", "--trials", "100000", "--seed", "1"]) else {
        panic!("simulate report expected")
    };
    assert!((r.empirical.classification.chsh_max - 4.0).abs() < 0.02);
    assert!(r.empirical.classification.max_marginal_deviation < 0.01);
}

#[test]
fn simulate_json_is_byte_identical() {
    for args in [
        vec!["simulate", "spheres", "--a", "10", "--ap", "-80", "--b", "33", "--bp", "200", "--trials", "5000", "--seed", "99", "--format", "json"],
        vec!["simulate", "vessels-box", "--trials", "5000", "--seed", "99", "--format", "json"],
    ] {
        let a = bellzoo(&args);
        let b = bellzoo(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn construct_commands() {
    let construct = |args: &[&str]| match json(args) {
        Report::Construct(r) => r.model,
        other => panic!("unexpected {other:?}"),
    };
    let m = construct(&["construct", &data("animal_acts.json")]);
    assert!(m.reproduction_residual < 1e-10);
    assert!(m.contexts.iter().any(|c| c.is_entangled()));

    let m = construct(&["construct", &data("uniform.json")]);
    assert!(m.reproduction_residual < 1e-10);

    // From the anticorrelated siphon state the AB context is measured in
    // the standard basis; the three single-siphon contexts are entangled.
    let m = construct(&["construct", &data("vessels.json"), "--state", "0,0,1,0,1,0,0,0"]);
    assert!(m.reproduction_residual < 1e-10);
    assert!(!m.contexts[0].is_entangled());
    assert!(m.contexts[1..].iter().all(|c| c.is_entangled()));

    // From the product default state AB cannot be a product measurement.
    let m = construct(&["construct", &data("vessels.json")]);
    assert!(m.reproduction_residual < 1e-10);
    assert!(m.contexts[0].is_entangled());
}
