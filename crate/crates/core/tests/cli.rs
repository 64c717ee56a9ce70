use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use netdes::cli::run;
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn plant() -> String {
    fixtures().join("plant.json").display().to_string()
}

fn sup() -> String {
    fixtures().join("supervisor.json").display().to_string()
}

/// Runs in-process and returns (exit code, stdout, stderr).
fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(args.iter().copied(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn nse_lines(report: &str) -> Vec<&str> {
    report
        .lines()
        .filter(|l| l.starts_with("NSE: ") || l.starts_with("t="))
        .collect()
}

const PERMISSIVE: &str = r#"{
  "kind": "supervisor",
  "states": ["p"],
  "initial": "p",
  "events": [
    {"name": "alpha", "controllable": true, "observable": true},
    {"name": "beta", "controllable": true, "observable": false},
    {"name": "lambda", "controllable": true, "observable": false}
  ],
  "transitions": [{"from": "p", "event": "alpha", "to": "p"}],
  "gamma": {"p": ["alpha", "beta", "lambda"]}
}
"#;

const FORCED: &str = r#"{
  "kind": "plant",
  "states": ["q0", "q1"],
  "initial": "q0",
  "events": [{"name": "u", "controllable": false, "observable": true}],
  "transitions": [{"from": "q0", "event": "u", "to": "q1"}]
}
"#;

#[test]
fn binary_reports_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_netdes");
    let ok = Command::new(bin)
        .args([
            "verify",
            "--plant",
            &plant(),
            "--supervisor",
            &sup(),
            "--bounds",
            "0,2,0,0",
        ])
        .args(["--safe-states", "q1,q2,q3,q4"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("verdict: safe"));
    let bad = Command::new(bin).args(["verify", "--bogus"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn exit_code_matrix() {
    let dir = TempDir::new().unwrap();
    let (p, s) = (plant(), sup());
    let permissive = write(&dir, "permissive.json", PERMISSIVE);
    let forced = write(&dir, "forced.json", FORCED);
    let obs = write(&dir, "obs.txt", "observe alpha\n");
    let twice = write(&dir, "twice.txt", "observe alpha\nobserve alpha\n");
    let missing = dir.path().join("nope.json").display().to_string();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (
            vec![
                "verify",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "0,2,0,0",
                "--safe-states",
                "q1,q2,q3,q4",
            ],
            0,
        ),
        (
            vec![
                "verify",
                "--plant",
                &p,
                "--supervisor",
                &permissive,
                "--bounds",
                "0,2,0,0",
                "--safe-states",
                "q1,q2,q3,q4",
            ],
            1,
        ),
        (
            vec!["verify", "--plant", &p, "--supervisor", &s, "--bounds", "0,2,0,0"],
            2,
        ),
        (
            vec![
                "verify",
                "--plant",
                &missing,
                "--supervisor",
                &s,
                "--bounds",
                "0,2,0,0",
                "--safe-states",
                "q1",
            ],
            2,
        ),
        (
            vec![
                "verify",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "0,2,0",
                "--safe-states",
                "q1",
            ],
            2,
        ),
        (
            vec![
                "verify",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "0,2,0,0",
                "--safe-states",
                "q9",
            ],
            2,
        ),
        (
            vec![
                "build-gs",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "2,2,2,2",
                "--budget",
                "10",
            ],
            3,
        ),
        (
            vec![
                "build-gs",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "2,2,2,2",
                "--budget",
                "0",
            ],
            2,
        ),
        (
            vec![
                "estimate",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "1,1,1,1",
                "--obs",
                &obs,
            ],
            0,
        ),
        (
            vec![
                "estimate",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "0,0,0,0",
                "--obs",
                &twice,
            ],
            1,
        ),
        (
            vec![
                "oracle-nse",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "0,0,0,0",
                "--obs",
                &twice,
            ],
            1,
        ),
        (
            vec![
                "baseline-estimate",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "0,2,0,0",
                "--obs",
                &obs,
            ],
            0,
        ),
        (
            vec![
                "baseline-estimate",
                "--plant",
                &p,
                "--supervisor",
                &s,
                "--bounds",
                "1,2,0,0",
                "--obs",
                &obs,
            ],
            2,
        ),
        (
            vec![
                "synthesize",
                "--plant",
                &forced,
                "--safe-states",
                "q0",
                "--bounds",
                "0,0,0,0",
            ],
            1,
        ),
        (
            vec![
                "synthesize",
                "--plant",
                &p,
                "--safe-states",
                "q1,q2,q3,q4",
                "--bounds",
                "0,2,0,0",
            ],
            0,
        ),
        (
            vec![
                "simulate",
                "--plant",
                &p,
                "--supervisor",
                &permissive,
                "--bounds",
                "0,2,0,0",
                "--steps",
                "200",
                "--safe-states",
                "q1,q2,q3,q4",
            ],
            1,
        ),
        (vec!["extract-supervisor", "--ainc", &p], 2),
        (vec!["fuzz", "--count", "2", "--max-states", "1"], 2),
        (vec!["frobnicate"], 2),
    ];
    for (args, want) in cases {
        let (code, out, err) = call(&args);
        assert_eq!(code, want, "{args:?}\nstdout:\n{out}\nstderr:\n{err}");
        if want == 2 {
            assert!(!err.is_empty(), "{args:?} gave no diagnostic");
        }
    }
}

#[test]
fn load_errors_name_the_offending_record() {
    let dir = TempDir::new().unwrap();
    let bad = FORCED.replace(r#""to": "q1""#, r#""to": "q7""#);
    let path = write(&dir, "bad.json", &bad);
    let (code, _, err) = call(&[
        "synthesize",
        "--plant",
        &path,
        "--safe-states",
        "q0",
        "--bounds",
        "0,0,0,0",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("transitions[0]"), "{err}");

    let mut missing_uc = PERMISSIVE.replace(
        r#""controllable": true, "observable": false}"#,
        r#""controllable": false, "observable": false}"#,
    );
    missing_uc = missing_uc.replace(r#"["alpha", "beta", "lambda"]"#, r#"["alpha"]"#);
    let plant_uc = write(
        &dir,
        "plant_uc.json",
        &fs::read_to_string(plant()).unwrap().replace(
            "\"controllable\": true,\n      \"observable\": false",
            "\"controllable\": false,\n      \"observable\": false",
        ),
    );
    let sup_path = write(&dir, "sup_uc.json", &missing_uc);
    let (code, _, err) = call(&[
        "verify",
        "--plant",
        &plant_uc,
        "--supervisor",
        &sup_path,
        "--bounds",
        "0,0,0,0",
        "--safe-states",
        "q1",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("uncontrollable") || err.contains("admissib"), "{err}");
}

#[test]
fn estimate_matches_oracle_nse() {
    let dir = TempDir::new().unwrap();
    let streams = [
        "",
        "observe alpha\n",
        "observe alpha issue beta\n",
        "# a comment\nobserve alpha issue {beta}\n",
    ];
    for bounds in ["0,0,0,0", "0,2,0,0", "1,1,1,1", "2,1,0,1"] {
        for (i, text) in streams.iter().enumerate() {
            let obs = write(&dir, &format!("s{i}.txt"), text);
            let common = [
                "--plant",
                &plant(),
                "--supervisor",
                &sup(),
                "--bounds",
                bounds,
                "--obs",
                &obs,
            ];
            let (c1, est, _) = call(&[&["estimate"], &common[..]].concat());
            let (c2, ora, _) = call(&[&["oracle-nse"], &common[..]].concat());
            assert_eq!((c1, c2), (0, 0));
            assert_eq!(nse_lines(&est), nse_lines(&ora), "bounds {bounds} stream {i}");
            assert!(nse_lines(&est).len() >= 2);
        }
    }
}

#[test]
fn oracle_rejects_an_action_the_supervisor_would_not_issue() {
    let dir = TempDir::new().unwrap();
    let obs = write(&dir, "obs.txt", "observe alpha issue alpha\n");
    let (code, _, err) = call(&[
        "oracle-nse",
        "--plant",
        &plant(),
        "--supervisor",
        &sup(),
        "--bounds",
        "0,0,0,0",
        "--obs",
        &obs,
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("supervisor decides"), "{err}");
}

#[test]
fn reports_are_byte_deterministic_and_echo_the_bounds() {
    let dir = TempDir::new().unwrap();
    let obs = write(&dir, "obs.txt", "observe alpha\n");
    let (p, s) = (plant(), sup());
    let runs: Vec<Vec<&str>> = vec![
        vec!["build-gs", "--plant", &p, "--supervisor", &s, "--bounds", "1,1,1,1"],
        vec![
            "estimate",
            "--plant",
            &p,
            "--supervisor",
            &s,
            "--bounds",
            "0,2,0,0",
            "--obs",
            &obs,
            "--augmented",
        ],
        vec![
            "simulate",
            "--plant",
            &p,
            "--supervisor",
            &s,
            "--bounds",
            "1,1,1,1",
            "--steps",
            "50",
            "--seed",
            "9",
        ],
        vec!["fuzz", "--seed", "3", "--count", "4", "--format", "structured"],
    ];
    for args in runs {
        let (c1, a, _) = call(&args);
        let (c2, b, _) = call(&args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b, "{args:?}");
        assert!(!a.contains("elapsed"));
        if let Some(i) = args.iter().position(|x| *x == "--bounds") {
            assert!(a.contains(&format!("No,Nc,Nlo,Nlc = {}", args[i + 1])), "{a}");
        }
    }
}

#[test]
fn structured_reports_carry_a_schema_version() {
    let (code, out, _) = call(&[
        "verify",
        "--plant",
        &plant(),
        "--supervisor",
        &sup(),
        "--bounds",
        "0,2,0,0",
        "--safe-states",
        "q1,q2,q3,q4",
        "--format",
        "structured",
        "--timing",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["bounds"], "0,2,0,0");
    assert_eq!(v["safe"], true);
    assert!(v["elapsed_ms"].is_number());
}

#[test]
fn unsafe_verdict_prints_a_witness() {
    let dir = TempDir::new().unwrap();
    let permissive = write(&dir, "permissive.json", PERMISSIVE);
    let (code, out, _) = call(&[
        "verify",
        "--plant",
        &plant(),
        "--supervisor",
        &permissive,
        "--bounds",
        "0,2,0,0",
        "--safe-states",
        "q1,q2,q3,q4",
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("verdict: unsafe"));
    assert!(out.contains("plant string: [alpha,beta,lambda]"), "{out}");
}

#[test]
fn synthesize_extract_verify_pipeline() {
    let dir = TempDir::new().unwrap();
    let ainc = dir.path().join("ainc.json").display().to_string();
    let out_sup = dir.path().join("sup.json").display().to_string();
    let (c, _, e) = call(&[
        "synthesize",
        "--plant",
        &plant(),
        "--safe-states",
        "q1,q2,q3,q4",
        "--bounds",
        "1,1,1,1",
        "--out",
        &ainc,
    ]);
    assert_eq!(c, 0, "{e}");
    for policy in ["greedy-max", "min", "fixed:"] {
        let (c, _, e) = call(&[
            "extract-supervisor",
            "--ainc",
            &ainc,
            "--policy",
            policy,
            "--out",
            &out_sup,
        ]);
        assert_eq!(c, 0, "{policy}: {e}");
        let (c, out, _) = call(&[
            "verify",
            "--plant",
            &plant(),
            "--supervisor",
            &out_sup,
            "--bounds",
            "1,1,1,1",
            "--safe-states",
            "q1,q2,q3,q4",
        ]);
        assert_eq!(c, 0, "{policy}: {out}");
    }
    let (c, _, e) = call(&[
        "extract-supervisor",
        "--ainc",
        &ainc,
        "--policy",
        "fixed:alpha,beta,lambda",
    ]);
    assert_eq!(c, 2, "{e}");
    let (c, _, e) = call(&["extract-supervisor", "--ainc", &ainc, "--policy", "widest"]);
    assert_eq!(c, 2, "{e}");

    let actions = write(&dir, "actions.txt", "# restricted\nalpha\nalpha,beta\n\n");
    let (c, out, e) = call(&[
        "synthesize",
        "--plant",
        &plant(),
        "--safe-states",
        "q1,q2,q3,q4",
        "--bounds",
        "1,1,1,1",
        "--actions",
        &actions,
    ]);
    assert_eq!(c, 0, "{e}");
    assert!(out.contains("nbts:"));
}

#[test]
fn fuzz_writes_loadable_instances() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("corpus");
    let d = out_dir.display().to_string();
    let (c, out, e) = call(&["fuzz", "--seed", "5", "--count", "3", "--out-dir", &d]);
    assert_eq!(c, 0, "{e}");
    assert_eq!(out.lines().filter(|l| l.starts_with("instance ")).count(), 3);
    for i in 0..3 {
        let p = out_dir.join(format!("instance{i}.plant.json")).display().to_string();
        let s = out_dir
            .join(format!("instance{i}.supervisor.json"))
            .display()
            .to_string();
        let (c, _, e) = call(&["build-gs", "--plant", &p, "--supervisor", &s, "--bounds", "1,1,1,1"]);
        assert_eq!(c, 0, "{e}");
    }
}

#[test]
fn build_gs_writes_a_gs_document() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("gs.json");
    let (c, report, _) = call(&[
        "build-gs",
        "--plant",
        &plant(),
        "--supervisor",
        &sup(),
        "--bounds",
        "1,1,1,1",
        "--out",
        &out.display().to_string(),
        "--verbose",
    ]);
    assert_eq!(c, 0);
    let doc = netdes::format::gs_doc_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let states_line = report.lines().find(|l| l.starts_with("states: ")).unwrap();
    assert_eq!(states_line, format!("states: {}", doc.states.len()));
}
