//! End-to-end tests of the `towplan` binary: output formats, golden files,
//! and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn towplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_towplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn manifest_path(relative: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(relative)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(manifest_path(&format!("tests/golden/{name}"))).expect("golden exists")
}

#[test]
fn solve_base_highway_json_matches_golden() {
    let output = towplan(&[
        "solve",
        "--fixture",
        "base_highway",
        "--method",
        "both",
        "--format",
        "json",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), golden("base_highway.json"));
}

#[test]
fn solve_modified_highway_json_matches_golden() {
    let output = towplan(&[
        "solve",
        "--fixture",
        "modified_highway",
        "--method",
        "both",
        "--format",
        "json",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), golden("modified_highway.json"));
}

#[test]
fn recompute_urban_json_matches_golden() {
    let output = towplan(&["recompute", "--fixture", "urban_paths", "--format", "json"]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), golden("urban_recompute.json"));
}

#[test]
fn program_dump_matches_golden() {
    let program = towplan::mip::IntegerProgram::build(&towplan::scenario::base_highway()).unwrap();
    assert_eq!(program.dump(), golden("base_program.txt"));
}

#[test]
fn solve_table_reports_agreement() {
    let output = towplan(&["solve", "--fixture", "base_highway", "--method", "both"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("method: mip"));
    assert!(text.contains("method: two-stage"));
    assert!(text.contains("total           190.00 min"));
    assert!(text.contains("agreement: objectives equal (190.00 min)"));
}

#[test]
fn solve_single_method_skips_agreement() {
    let output = towplan(&[
        "solve",
        "--fixture",
        "modified_highway",
        "--method",
        "two-stage",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("total           522.75 min"));
    assert!(text.contains("links 13,7,6,1"));
    assert!(!text.contains("agreement"));
}

#[test]
fn single_method_json_omits_agreement() {
    let output = towplan(&[
        "solve",
        "--fixture",
        "base_highway",
        "--method",
        "mip",
        "--format",
        "json",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("\"reports\": ["));
    assert!(text.contains("\"method\": \"mip\""));
    assert!(!text.contains("two-stage"));
    assert!(!text.contains("agreement"));
}

#[test]
fn missing_scenario_file_is_a_parse_error() {
    let output = towplan(&["solve", "--scenario", "/nonexistent/path.scn"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("error"));
}

#[test]
fn solving_the_urban_fixture_is_rejected() {
    let output = towplan(&["solve", "--fixture", "urban_paths"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("recompute"));
    assert!(stdout(&output).is_empty());
}

#[test]
fn recomputing_a_solvable_fixture_is_rejected() {
    let output = towplan(&["recompute", "--fixture", "base_highway"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("solve"));
}

#[test]
fn unknown_fixture_is_a_usage_error() {
    let output = towplan(&["solve", "--fixture", "no_such_place"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("unknown fixture"));
}

#[test]
fn infeasible_scenario_exits_three() {
    let path = manifest_path("tests/data/infeasible.scn");
    let output = towplan(&["solve", "--scenario", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("mip"));
}

#[test]
fn validate_clean_fixture_file() {
    let path = manifest_path("fixtures/base_highway.scn");
    let output = towplan(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(
        stdout(&output),
        "OK, 12 nodes, 13 links, 24 directed pairs\n"
    );
}

#[test]
fn validate_names_the_dangling_link() {
    let path = manifest_path("tests/data/dangling.scn");
    let output = towplan(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let text = stdout(&output);
    assert!(
        text.contains("link 2") && text.contains("node 42"),
        "diagnostics were:\n{text}"
    );
}

#[test]
fn validate_reports_missing_breakdown() {
    let path = manifest_path("tests/data/no_breakdown.scn");
    let output = towplan(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stdout(&output).contains("no breakdown site"));
}

#[test]
fn bench_runs_and_prints_medians() {
    let output = towplan(&["bench", "--fixture", "base_highway", "--repeats", "3"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("bench base_highway: 3 repeats"));
    assert!(text.contains("mip"));
    assert!(text.contains("two-stage"));
    assert!(text.contains("speedup"));
}

#[test]
fn bench_accepts_a_single_repeat() {
    let output = towplan(&["bench", "--fixture", "modified_highway", "--repeats", "1"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("1 repeats"));
}

#[test]
fn bench_rejects_the_urban_fixture() {
    let output = towplan(&["bench", "--fixture", "urban_paths"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn help_prints_usage() {
    let output = towplan(&["help"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("usage:"));
}

#[test]
fn missing_source_is_a_usage_error() {
    let output = towplan(&["solve"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("--fixture"));
}

#[test]
fn scenario_files_round_trip_through_the_library() {
    for fixture in ["fixtures/base_highway.scn", "fixtures/modified_highway.scn"] {
        let path = manifest_path(fixture);
        let scenario = towplan::scenario::load_scenario(&path).unwrap();
        let reparsed = towplan::scenario::parse_scenario(&scenario.serialize()).unwrap();
        assert_eq!(scenario, reparsed, "{fixture}");
    }
}
