use std::path::PathBuf;

use ordsys::cli::{run, EXIT_OK, EXIT_PROPERTY, EXIT_USAGE};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn ordsys(args: &[&str]) -> (i32, String) {
    run(std::iter::once("ordsys").chain(args.iter().copied()))
}

#[test]
fn initial_segments_have_dimension_one() {
    let (code, out) = ordsys(&["vc", "--family", &fixture("initseg6.fam")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("VC: 1\n"));
    assert!(out.contains("SHATTERED: {0}\n"));
    assert!(out.contains("trace {} from {}"));
}

#[test]
fn closure_of_trivial_system() {
    let (code, out) = ordsys(&[
        "closure", "--system", "trivial", "--n", "2", "--lambda", "w^2", "--set", "{3,5}", "--budget", "1000",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("CLOSED: {0,1,2,3,5}\n"), "{out}");
}

#[test]
fn tsv_output() {
    let (code, out) = ordsys(&["vc", "--family", &fixture("ksubsets8_3.fam"), "--format", "tsv"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("VC\t3\n"));
    assert!(out.lines().any(|l| l.starts_with("WITNESS\ttrace")));
}

#[test]
fn corrupted_system_is_a_property_failure() {
    let path = fixture("negative/corrupted.sys");
    let (code, out) = ordsys(&["validate", "--system", &path]);
    assert_eq!(code, EXIT_PROPERTY);
    assert!(out.contains("VALID: no\n"));
    assert!(out.contains("WITNESS:\n  line 4: not a well-order"));
    let (code, out) = ordsys(&["convert", "--system", &path]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.contains("line 4, column 1"), "{out}");
}

#[test]
fn usage_errors() {
    assert_eq!(ordsys(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(ordsys(&["vc", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(ordsys(&["vc", "--family", "/nonexistent/x.fam"]).0, EXIT_USAGE);
    assert_eq!(ordsys(&["closure", "--system", "trivial", "--n", "2"]).0, EXIT_USAGE);
    assert_eq!(ordsys(&["verify", "--suite", "nope"]).0, EXIT_USAGE);
    let (code, out) = ordsys(&["vc", "--family", &fixture("initseg6.fam"), "--out", "/tmp/x"]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn convert_writes_canonical_files() {
    let dir = std::env::temp_dir().join(format!("ordsys-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let messy = dir.join("messy.fam");
    std::fs::write(&messy, "family v1 ground={2,1,0}\n{1}\n\n{0,1}\n{1}\n").unwrap();
    let out = dir.join("clean.fam");
    let (code, _) = ordsys(&[
        "convert",
        "--family",
        messy.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "family v1 ground={0,1,2}\n{0,1}\n{1}\n"
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn generic_extension_from_condition_file() {
    let (code, out) = ordsys(&["generic", "--cond", &fixture("sample.cond"), "--set", "{2,w*3}"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("CLOSED: {0,1,2,w+1,w*3}\n"), "{out}");
    assert!(out.contains("FORCED: yes\n"));
}

#[test]
fn omega1_suite_is_deterministic() {
    let args = ["verify", "--suite", "omega1", "--seed", "7", "--samples", "100"];
    let (code, a) = ordsys(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(a, ordsys(&args).1);
    for k in 1..=5 {
        assert!(a.contains(&format!("PASS omega1: ({k})")));
    }
}

#[test]
fn generic_suite_reports_extension_cases() {
    let (code, out) = ordsys(&["verify", "--suite", "generic", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("PASS generic: extended conditions force closedness (cases=500)"));
}
