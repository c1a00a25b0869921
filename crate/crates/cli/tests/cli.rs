use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn bratteli(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bratteli"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("BRATTELI_THREADS", n.to_string()),
        None => cmd.env_remove("BRATTELI_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json report")
}

struct Case {
    spec: PathBuf,
    args: Vec<String>,
}

impl Case {
    fn argv(&self) -> Vec<String> {
        let mut v = vec![self.args[0].clone(), self.spec.display().to_string()];
        v.extend(self.args[1..].iter().cloned());
        v.extend(["--format".into(), "json".into()]);
        v
    }

    fn fixture(&self) -> PathBuf {
        let stem = self.spec.file_stem().unwrap().to_string_lossy();
        corpus()
            .join("expected")
            .join(format!("{stem}.{}.json", self.args[0]))
    }
}

fn cases() -> Vec<Case> {
    let text = fs::read_to_string(corpus().join("cases.json")).unwrap();
    let raw: Vec<Value> = serde_json::from_str(&text).unwrap();
    raw.iter()
        .map(|c| Case {
            spec: corpus().join(c["spec"].as_str().unwrap()),
            args: c["args"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| a.as_str().unwrap().to_string())
                .collect(),
        })
        .collect()
}

/// Set `BRATTELI_BLESS=1` to rewrite the fixtures instead of comparing.
#[test]
fn corpus_matches_fixtures() {
    let bless = std::env::var_os("BRATTELI_BLESS").is_some();
    for case in cases() {
        let mut argv = case.argv();
        if bless {
            argv.push("--bless".into());
        }
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = bratteli(&argv, None);
        assert!(
            out.status.success(),
            "{argv:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let expected = fs::read(case.fixture())
            .unwrap_or_else(|e| panic!("{}: {e}", case.fixture().display()));
        assert!(
            out.stdout == expected,
            "{argv:?} differs from {}",
            case.fixture().display()
        );
    }
}

#[test]
fn output_is_identical_across_thread_counts() {
    for case in cases() {
        let argv = case.argv();
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let one = bratteli(&argv, Some(1));
        let many = bratteli(&argv, Some(4));
        let again = bratteli(&argv, Some(4));
        assert!(one.status.success());
        assert_eq!(one.stdout, many.stdout, "{argv:?}");
        assert_eq!(many.stdout, again.stdout, "{argv:?}");
    }
}

#[test]
fn nsquared_has_two_measures() {
    let spec = corpus().join("nsquared.json");
    let out = bratteli(
        &[
            "measures",
            spec.to_str().unwrap(),
            "--depth",
            "100",
            "--format",
            "json",
        ],
        None,
    );
    let v = json_of(&out);
    assert_eq!(v["count"], 2);
    assert_eq!(v["measures"].as_array().unwrap().len(), 2);
}

#[test]
fn stationary_extension_is_finite() {
    let spec = corpus().join("stationary23.json");
    let out = bratteli(
        &[
            "extend",
            spec.to_str().unwrap(),
            "--sub",
            "right",
            "--format",
            "json",
        ],
        None,
    );
    let v = json_of(&out);
    assert_eq!(v["verdict"]["label"], "CertifiedFinite");
    let last: f64 = v["i_n"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!((last - 2.0).abs() < 1e-9);
}

#[test]
fn forced_criterion_is_reported() {
    let spec = corpus().join("stationary23.json");
    let s = spec.to_str().unwrap();
    let out = bratteli(
        &[
            "extend",
            s,
            "--sub",
            "right",
            "--criterion",
            "normratioseries",
            "--format",
            "json",
        ],
        None,
    );
    assert_eq!(json_of(&out)["criterion"], "NormRatioSeries");
    let bad = bratteli(
        &["extend", s, "--sub", "right", "--criterion", "nope"],
        None,
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn thue_morse_word() {
    let spec = corpus().join("thue-morse.json");
    let out = bratteli(&["word", spec.to_str().unwrap(), "--level", "4"], None);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("abbabaab\n"));
}

#[test]
fn word_out_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tm.txt");
    let spec = corpus().join("thue-morse.json");
    let out = bratteli(
        &[
            "word",
            spec.to_str().unwrap(),
            "--level",
            "5",
            "--factor",
            "ab",
            "--out",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&path).unwrap(), "abbabaabbaababba");
    let sidecar: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tm.txt.json")).unwrap()).unwrap();
    assert_eq!(sidecar["generated"], 16);
    assert_eq!(sidecar["factors"][0]["count"], 5);
}

#[test]
fn morse_emits_a_loadable_spec() {
    let out = bratteli(
        &["morse", "--k", "2", "--block", "01", "--format", "json"],
        None,
    );
    let v = json_of(&out);
    assert_eq!(v["verdict"]["label"], "CertifiedUnique");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tm.json");
    fs::write(&path, serde_json::to_string(&v["spec"]).unwrap()).unwrap();
    let word = bratteli(&["word", path.to_str().unwrap(), "--level", "4"], None);
    assert!(String::from_utf8_lossy(&word.stdout).starts_with("abbabaab\n"));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(
        &broken,
        r#"{"rank": 2, "generator": {"kind": "stationary", "payload": {"matrix": [[1, 2]]}}}"#,
    )
    .unwrap();
    let out = bratteli(&["decompose", broken.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.json"), "{err}");

    let missing = bratteli(&["decompose", "/nonexistent/spec.json"], None);
    assert_eq!(missing.status.code(), Some(2));

    let spec = corpus().join("stationary23.json");
    let s = spec.to_str().unwrap();
    assert_eq!(
        bratteli(&["extend", s, "--sub", "middle"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bratteli(&["measures", s, "--depth", "1"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bratteli(&["measures", s, "--eps", "2"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        bratteli(&["morse", "--k", "2", "--block", "0?"], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn budgets_exit_3() {
    let spec = corpus().join("odometers.json");
    let s = spec.to_str().unwrap();
    let out = bratteli(&["measures", s, "--depth", "400", "--bit-cap", "64"], None);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let slow = corpus().join("diagonal3.json");
    let out = bratteli(
        &[
            "measures",
            slow.to_str().unwrap(),
            "--depth",
            "100000",
            "--time-budget",
            "0.2",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn table_output_is_capped() {
    let spec = corpus().join("hermite.json");
    let out = bratteli(
        &["measures", spec.to_str().unwrap(), "--depth", "300"],
        None,
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let rows = text
        .lines()
        .filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit()) && !l.contains("measure"))
        .count();
    assert!(rows <= 20, "{rows} rows");
}
