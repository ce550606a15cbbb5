use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chowring"))
        .current_dir(root())
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn lex_basis_of_the_symmetric_ideal() {
    let o = run(&["gb", "data/sym2.ideal", "--order", "lex"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "{t1 + t2, t2^2}");
}

#[test]
fn membership_and_normal_form() {
    let o = run(&["member", "data/sym2.ideal", "--poly", "t1^3 + t2^3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");
    let o = run(&["nf", "data/sym2.ideal", "--poly", "t1*t2 + t1", "--order", "lex"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-t2");
}

#[test]
fn g2_is_a_non_zero_divisor_on_stage_two() {
    let o = run(&["nzd", "data/stage2.pres", "--element", "g2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("true"), "{}", stdout(&o));
}

#[test]
fn stage_3a_square_is_certified() {
    let o = run(&["fiber", "data/squares/stage3a.square", "--dmax", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with(" ok")).count(), 8, "{text}");
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(run(&["gb", "data/missing.ideal"]).status.code(), Some(2));
    assert_eq!(run(&["gb", "data/sym2.ideal", "--order", "revlex"]).status.code(), Some(2));
    assert_eq!(run(&["gb", "data/sym2.ideal", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify-paper", "data/strata"]).status.code(), Some(2));
    let o = run(&["member", "data/sym2.ideal", "--poly", "t1 +* t2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1:"), "{}", stderr(&o));
    let o = run(&["member", "data/sym2.ideal", "--poly", "t3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify-paper", "data/strata", "data/claims.claims", "--convention", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_paper_reports_discrepancies_deterministically() {
    let dir = std::env::temp_dir().join(format!("chowring-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut reports = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("report{k}.json"));
        let o = run(&[
            "verify-paper",
            "data/strata/",
            "data/claims.claims",
            "--convention",
            "-1,-1,-1",
            "--format",
            "machine",
            "--out",
            out.to_str().unwrap(),
        ]);
        // some claims fail as printed, so the run is a discrepancy
        assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
        reports.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let json: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    let rows = json["claims"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["id"].as_str().unwrap().starts_with("final.row"))
        .count();
    assert_eq!(rows, 11);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn convention_search_names_the_conflict() {
    let o = run(&["verify-paper", "data/strata", "data/claims.claims", "--search"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("stage2.result <-> stage3a.previous_relation"));
}
