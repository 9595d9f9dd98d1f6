use std::path::Path;
use std::process::{Command, Output};

use holonoid_cli::{gallery, parse_scenario, run_scenario, validate, Overrides, RunOptions};
use serde_json::Value;

fn holonoid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holonoid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const PLANE: &str = r#"
  "groupoids": { "plane": { "model": "pair_box", "lower": [-3, -3], "upper": [3, 3] } },
  "subalgebroids": { "tangent": { "presentation": "plane", "generators": [["1", "0"], ["0", "1"]] } },
  "charts": {
    "xy": {
      "subalgebroid": "tangent", "groupoid": "plane",
      "lambda_box": { "lower": [-1, -1], "upper": [1, 1] },
      "base_box": { "lower": [-1, -1], "upper": [1, 1] }
    }
  }"#;

#[test]
fn empty_task_list_gives_an_empty_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "empty.json", r#"{ "schema_version": 1, "name": "empty" }"#);
    let out = dir.path().join("report.json");
    let o = holonoid(&["run", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["tasks"], Value::Array(vec![]));
    assert_eq!(report["summary"]["passed"], Value::Bool(true));
}

#[test]
fn exported_gallery_files_validate() {
    let dir = tempfile::tempdir().unwrap();
    let o = holonoid(&["gallery-list"]);
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names.len(), 7);
    for name in &names {
        let file = dir.path().join(format!("{name}.json"));
        let o = holonoid(&["gallery-export", name, "--out", file.to_str().unwrap()]);
        assert!(o.status.success());
        let o = holonoid(&["validate", file.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
    let o = holonoid(&["gallery-export", "no-such-scenario"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn anchor_with_wrong_row_count_names_the_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.json",
        r#"{
          "schema_version": 1, "name": "bad",
          "presentations": {
            "skew": { "kind": "explicit", "n": 2, "r": 1, "anchor": [["x1"]] }
          }
        }"#,
    );
    let o = holonoid(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("presentations.skew.anchor"), "{e}");
    assert!(e.contains("expected 2 rows"), "{e}");
}

#[test]
fn degenerate_chart_reports_its_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "squash.json",
        r#"{
          "schema_version": 1, "name": "squash",
          "groupoids": { "plane": { "model": "pair_box", "lower": [-3, -3], "upper": [3, 3] } },
          "subalgebroids": { "contract": { "presentation": "plane", "generators": [["-20*x0", "0"]] } },
          "charts": {
            "squash": {
              "subalgebroid": "contract", "groupoid": "plane",
              "lambda_box": { "lower": [0], "upper": [1] },
              "base_box": { "lower": [-1, -1], "upper": [1, 1] }
            }
          }
        }"#,
    );
    let o = holonoid(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("charts.squash"), "{e}");
    assert!(e.contains("lambda = [1.0]"), "{e}");
}

#[test]
fn parse_errors_carry_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "broken.json", "{\n  \"schema_version\": 1,\n  \"name\": \n}");
    let o = holonoid(&["run", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let unknown = r#"{ "schema_version": 1, "name": "x", "tasks": [{ "kind": "levitate" }] }"#;
    let e = parse_scenario(unknown, "inline").unwrap_err();
    assert!(e.message.contains("levitate"), "{e}");
}

#[test]
fn unresolved_names_are_validation_errors() {
    let text = format!(
        r#"{{ "schema_version": 1, "name": "refs", {PLANE},
          "tasks": [{{ "kind": "domain_check", "chart": "nowhere" }}] }}"#
    );
    let s = parse_scenario(&text, "inline").unwrap();
    let d = validate(&s, &Overrides::default());
    assert_eq!(d.len(), 1);
    assert!(d[0].block.starts_with("tasks[0]"), "{d:?}");
    assert!(d[0].message.contains("nowhere"));
}

#[test]
fn failed_assertions_exit_with_one_and_bad_overrides_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "assert.json",
        &format!(
            r#"{{ "schema_version": 1, "name": "assert", {PLANE},
              "tasks": [{{
                "kind": "chart_eval", "chart": "xy", "lambda": [0.5, 0], "base": [0, 0],
                "assert": [{{ "metric": "distance_to_unit", "op": "<", "value": 0.1 }}]
              }}] }}"#
        ),
    );
    let o = holonoid(&["run", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("distance_to_unit"));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["summary"]["failed_assertions"], 1);

    let o = holonoid(&["run", &path, "--tol-phi", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn task_errors_are_recorded_not_fatal() {
    let text = format!(
        r#"{{ "schema_version": 1, "name": "errors", {PLANE},
          "tasks": [
            {{ "kind": "chart_eval", "chart": "xy", "lambda": [5, 0], "base": [0, 0] }},
            {{ "kind": "chart_eval", "chart": "xy", "lambda": [0, 0], "base": [0, 0] }}
          ] }}"#
    );
    let s = parse_scenario(&text, "inline").unwrap();
    let r = run_scenario(&s, &RunOptions::default()).unwrap();
    assert!(r.tasks[0].error.is_some());
    assert!(r.tasks[1].error.is_none());
    assert!(r.summary.passed);
    assert_eq!(r.summary.errors, 1);
}

#[test]
fn overrides_reach_the_report_and_the_sampling() {
    let s = gallery::scenario("so2-in-so3").unwrap();
    let base = run_scenario(&s, &RunOptions::default()).unwrap();
    let opts = RunOptions {
        overrides: Overrides {
            seed: Some(99),
            tol_phi: Some(1e-6),
            ..Overrides::default()
        },
        timings: false,
    };
    let other = run_scenario(&s, &opts).unwrap();
    assert_eq!(other.settings.seed, 99);
    assert_eq!(other.settings.equiv.tol_phi, 1e-6);
    let battery = |r: &holonoid_cli::Report| r.tasks.iter().find(|t| t.id == "battery").unwrap().table.clone();
    assert_ne!(battery(&base), battery(&other));
    assert!(other.summary.passed);
}

#[test]
fn csv_tables_are_written_per_task() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tables");
    let o = holonoid(&[
        "run",
        "gallery:xy-dz-fibers",
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut files: Vec<String> = std::fs::read_dir(&csv)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["00-vertical-fibers.csv", "01-free-fibers.csv", "04-vertical-leaves.csv"]);
    let text = std::fs::read_to_string(csv.join("01-free-fibers.csv")).unwrap();
    assert!(text.starts_with("kind,point,dim,upper_bound_only,minimal_generators\n"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in ["dxy-leaves", "so3-fields", "so2-in-so3", "xy-dz-fibers"] {
        let s = gallery::scenario(name).unwrap();
        let a = run_scenario(&s, &RunOptions::default()).unwrap().to_json();
        let b = run_scenario(&s, &RunOptions::default()).unwrap().to_json();
        assert_eq!(a, b, "{name}");
    }
}
