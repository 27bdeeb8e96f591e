mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{datasets, SCRIPT_MODEL};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roster-milp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn formulate(instance: &str, out: &Path) -> Output {
    let inst = datasets().join(instance);
    bin(&["formulate", inst.to_str().unwrap(), "--model-id", SCRIPT_MODEL, "--out", out.to_str().unwrap()])
}

#[test]
fn formulate_then_solve_bus_drivers() {
    let dir = tempfile::tempdir().unwrap();
    let o = formulate("bundled/bus-drivers", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("Formulated 6 variables and 6 constraints."));
    for f in ["model.tex", "model.lp", "model.json", "plan.json", "store.json", "activation.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let tex = fs::read_to_string(dir.path().join("model.tex")).unwrap();
    // One displayed demand row per period, each labelled.
    assert_eq!((1..=6).filter(|t| tex.contains(&format!(r"\text{{(demand\_{t})}}"))).count(), 6, "{tex}");

    let o = bin(&["solve", dir.path().join("model.lp").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("Optimal objective value: 26"));
    assert_eq!(lines.next(), Some("Variable values:"));
    let total: f64 = lines.map(|l| l.split(" = ").nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert_eq!(total, 26.0);
}

#[test]
fn formulate_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&formulate("bundled/post-office", a.path())), 0);
    assert_eq!(code(&formulate("bundled/post-office", b.path())), 0);
    for f in ["model.tex", "model.lp", "model.json", "plan.json", "store.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn solve_reports_infeasible_and_zero_optima() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lp");
    fs::write(&bad, "Minimize\n obj: x\nSubject To\n c1: x >= 3\n c2: x <= 2\nGenerals\n x\nEnd\n").unwrap();
    let o = bin(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "No optimal solution found.\n");

    let zero = dir.path().join("zero.lp");
    fs::write(&zero, "Minimize\n obj: x + y\nSubject To\n c1: x + y >= 0\nGenerals\n x y\nEnd\n").unwrap();
    let o = bin(&["solve", zero.to_str().unwrap()]);
    assert_eq!(stdout(&o), "Optimal objective value: 0\nVariable values:\n");
}

#[test]
fn solve_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bin(&["solve", dir.path().join("nope.lp").to_str().unwrap()])), 3);
    let junk = dir.path().join("junk.lp");
    fs::write(&junk, "this is not an lp file\n").unwrap();
    assert_eq!(code(&bin(&["solve", junk.to_str().unwrap()])), 8);
}

#[test]
fn formulate_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(code(&bin(&["formulate", "/no/such/instance", "--out", out])), 3);
    // The bundled fixtures are keyed on the scripted model id.
    let bus = datasets().join("bundled/bus-drivers");
    assert_eq!(code(&bin(&["formulate", bus.to_str().unwrap(), "--out", out])), 4);
    // A bare description has no fixture directory to replay from.
    let desc = dir.path().join("d.md");
    fs::write(&desc, "Some staffing problem.").unwrap();
    let o = bin(&["formulate", desc.to_str().unwrap(), "--graph", "shift", "--model-id", SCRIPT_MODEL, "--out", out]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&bin(&["bogus"])), 2);
}

#[test]
fn plan_lists_tasks_in_order() {
    let o = bin(&["plan", "--graph", "shift", "Shifts", "Minimum labour demand per period"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("1. set of periods"));
    assert!(text.contains("[after: set of periods]"));
    assert_eq!(code(&bin(&["plan", "--graph", "shift", "No Such Node"])), 2);
    assert_eq!(stdout(&bin(&["plan", "--graph", "shift"])), "(empty plan)\n");
    assert_eq!(code(&bin(&["plan", "Shifts"])), 2);
}

#[test]
fn eval_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let bundled = datasets().join("bundled");
    let out = dir.path().to_str().unwrap();
    let o = bin(&["eval", bundled.to_str().unwrap(), "--trials", "2", "--model-id", SCRIPT_MODEL, "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("report.json").is_file() && dir.path().join("report.md").is_file());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["ea_per_trial"], serde_json::json!([1.0, 1.0]));

    assert_eq!(code(&bin(&["eval", bundled.to_str().unwrap(), "--trials", "0", "--out", out])), 2);
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(code(&bin(&["eval", empty.path().to_str().unwrap(), "--out", out])), 2);
}
