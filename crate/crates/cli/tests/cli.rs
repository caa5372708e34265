use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fano-e7");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_file(name: &str, text: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// Value of `key=...` in a space-separated output line.
fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn real(line: &str, key: &str) -> f64 {
    let v = field(line, key).unwrap_or_else(|| panic!("{key} missing in {line:?}"));
    v.split(',').next().unwrap().parse().unwrap()
}

fn line_file(name: &str, line: &str, entries: [[f64; 2]; 8]) -> String {
    let body: Vec<String> = entries
        .iter()
        .map(|[re, im]| format!("[{re:e},{im:e}]"))
        .collect();
    write_file(
        name,
        &format!(r#"{{"lines": {{"{line}": [{}]}}}}"#, body.join(",")),
    )
}

fn ghz_file() -> String {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut e = [[0.0; 2]; 8];
    e[0] = [s, 0.0];
    e[7] = [s, 0.0];
    line_file("ghz.json", "ABD", e)
}

fn w_file() -> String {
    let s = 1.0 / 3f64.sqrt();
    let mut e = [[0.0; 2]; 8];
    for i in [1, 2, 4] {
        e[i] = [s, 0.0];
    }
    line_file("w.json", "ABD", e)
}

#[test]
fn det_on_ghz_and_w() {
    let out = run(&["det", &ghz_file(), "--line", "ABD"]);
    assert!(out.status.success());
    let s = stdout(&out);
    assert!((real(&s, "det") - 0.25).abs() < 1e-15);
    assert!(s.contains("det=") && s.contains(",0 "));
    assert!((real(&s, "tangle3") - 1.0).abs() < 1e-15);
    assert_eq!(field(&s, "class"), Some("ghz+"));

    let s = stdout(&run(&["det", &w_file()]));
    assert_eq!(s.trim(), "det=0,0 tangle3=0 class=sep/W");
}

#[test]
fn det_on_complex_amplitudes_omits_class() {
    let mut e = [[0.0; 2]; 8];
    e[0] = [0.0, 0.5];
    e[7] = [0.5, 0.0];
    let s = stdout(&run(&["det", &line_file("complex.json", "ABD", e)]));
    assert!(field(&s, "class").is_none(), "{s}");
    // A line absent from the file is zero.
    let s = stdout(&run(&["det", &ghz_file(), "--line", "CDF"]));
    assert_eq!(s.trim(), "det=0,0 tangle3=0 class=sep/W");
}

#[test]
fn i4_classify_entropy_on_ghz() {
    let f = ghz_file();
    let s = stdout(&run(&["i4", &f]));
    assert!((real(&s, "i4") + 0.25).abs() < 1e-15);
    assert!((real(&s, "tangle7") - 1.0).abs() < 1e-15);
    let s = stdout(&run(&["classify", &f]));
    assert_eq!(field(&s, "kind"), Some("large-nonbps"));
    assert_eq!(field(&s, "zero_tol"), Some("1e-8"));
    assert!(field(&s, "bps").is_none());
    let s = stdout(&run(&["entropy", &f]));
    assert!((real(&s, "S") - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
}

#[test]
fn normal_form_inputs() {
    let s = stdout(&run(&["classify", "--rho", "3,1,1,1", "--phi", "0"]));
    assert_eq!(field(&s, "i4"), Some("48"));
    assert_eq!(field(&s, "kind"), Some("large-bps"));
    let s = stdout(&run(&["entropy", "--rho", "3,1,1,1", "--phi", "0"]));
    let expected = std::f64::consts::PI * 48f64.sqrt();
    assert!((real(&s, "S") - expected).abs() < 1e-12 * expected);
    let s = stdout(&run(&["classify", "--rho", "1,1,1,1", "--phi", "0"]));
    assert_eq!(field(&s, "i4"), Some("0"));
    assert_eq!(field(&s, "kind"), Some("small"));
    assert_eq!(field(&s, "bps"), Some("1/2"));
    let s = stdout(&run(&["classify", "--rho", "2,1,1,0"]));
    assert_eq!(field(&s, "bps"), Some("1/8"));
    let s = stdout(&run(&["classify", "--rho", "1,1,0,0"]));
    assert_eq!(field(&s, "bps"), Some("1/4"));
}

#[test]
fn zero_tol_override() {
    // I4 = 48 on scale 3: 48/81 ≈ 0.59 relative
    let s = stdout(&run(&["classify", "--rho", "3,1,1,1", "--zero-tol", "1"]));
    assert_eq!(field(&s, "kind"), Some("small"));
    assert_eq!(field(&s, "zero_tol"), Some("1"));
    assert_eq!(
        run(&["classify", "--rho", "3,1,1,1", "--zero-tol", "-1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn complex_invariant_rejected_by_classify() {
    let out = run(&["random", "--seed", "3"]);
    let f = write_file("random_all.json", &stdout(&out));
    let out = run(&["classify", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ImagTooLarge"));
    assert!(run(&["i4", &f]).status.success());
}

#[test]
fn input_errors_exit_one() {
    let eight = "[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]";
    let bad = [
        write_file(
            "unknown.json",
            &format!(r#"{{"lines": {{"XYZ": {eight}}}}}"#),
        ),
        write_file("short.json", r#"{"lines": {"ABD": [[1,0],[0,0]]}}"#),
        write_file("triple.json", r#"{"lines": {"ABD": [[1,0,0]]}}"#),
        write_file("garbage.json", "{"),
    ];
    for f in &bad {
        assert_eq!(run(&["i4", f]).status.code(), Some(1), "{f}");
    }
    assert_eq!(
        run(&["i4", "/nonexistent/state.json"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["det", &ghz_file(), "--line", "ABC"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["classify"]).status.code(), Some(1));
    assert_eq!(
        run(&["classify", &ghz_file(), "--rho", "1,1,1,1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["classify", "--rho", "1,1,1"]).status.code(), Some(1));
    assert_eq!(
        run(&["classify", "--rho", "1,-1,0,0"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["check", "--suite", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_suites_pass() {
    let out = run(&["check", "--suite", "counts"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.contains("multiplicities=1,7,21,35,35,21,7,1 total=2187"));

    let out = run(&["check", "--suite", "octonion"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("line_relations=21"));
    assert!(stdout(&out).contains("antisymmetric_entries=42"));

    let out = run(&["check", "--suite", "fano"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("line_pairs_meeting_once=21"));

    let args = [
        "check",
        "--suite",
        "invariance",
        "--seed",
        "42",
        "--samples",
        "100",
        "--tol",
        "1e-9",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert_eq!(s.lines().filter(|l| l.starts_with("sample=")).count(), 300);
    assert!(s.trim_end().ends_with("status=pass"));

    let out = run(&["check", "--suite", "oracles", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out)
            .lines()
            .filter(|l| l.starts_with("check="))
            .count(),
        14
    );
}

#[test]
fn failing_check_exits_two_and_names_it() {
    let out = run(&[
        "check",
        "--suite",
        "invariance",
        "--samples",
        "3",
        "--tol",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sample=") && err.contains("check="), "{err}");
    let out = run(&[
        "check",
        "--suite",
        "oracles",
        "--samples",
        "3",
        "--tol",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single-line:ABD"));
}

#[test]
fn random_is_deterministic_and_round_trips() {
    let a = run(&["random", "--lines", "ABD", "--seed", "7"]);
    let b = run(&["random", "--lines", "ABD", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(
        a.stdout,
        run(&["random", "--lines", "ABD", "--seed", "8"]).stdout
    );

    let text = stdout(&a);
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let lines = parsed["lines"].as_object().unwrap();
    assert_eq!(lines.keys().collect::<Vec<_>>(), ["ABD"]);
    assert_eq!(lines["ABD"].as_array().unwrap().len(), 8);

    let f = write_file("random_abd.json", &text);
    let s = stdout(&run(&["det", &f]));
    let det: Vec<f64> = field(&s, "det")
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let s = stdout(&run(&["i4", &f]));
    let i4: Vec<f64> = field(&s, "i4")
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    // one line: I4 = -Det
    assert!((i4[0] + det[0]).abs() < 1e-15 && (i4[1] + det[1]).abs() < 1e-15);
    // re-serializing the parsed file is lossless
    let again = write_file(
        "random_abd_again.json",
        &serde_json::to_string(&parsed).unwrap(),
    );
    assert_eq!(stdout(&run(&["i4", &again])), s);
}

#[test]
fn random_normalize() {
    let out = run(&[
        "random",
        "--lines",
        "ABD,BCE,CDF,DEG,EFA,FGB,GAC",
        "--normalize",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mut norm = 0.0;
    for (_, entries) in parsed["lines"].as_object().unwrap() {
        for pair in entries.as_array().unwrap() {
            for v in pair.as_array().unwrap() {
                norm += v.as_f64().unwrap().powi(2);
            }
        }
    }
    assert!((norm.sqrt() - 1.0).abs() < 1e-12);
    assert_eq!(run(&["random", "--lines", "XYZ"]).status.code(), Some(1));
}
