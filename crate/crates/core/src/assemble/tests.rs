use serde_json::{json, Value};

use super::*;
use crate::extract::Absence;
use crate::graph::bundled_graph;

fn store(entries: &[(&str, Value)]) -> ExtractionStore {
    let mut s = ExtractionStore::default();
    for (k, v) in entries {
        s.entries.insert(k.to_string(), v.clone());
    }
    s
}

fn bus_entries() -> Vec<(&'static str, Value)> {
    let times = ["00:00", "04:00", "08:00", "12:00", "16:00", "20:00", "24:00"];
    vec![
        (
            "set of periods",
            json!({
                "value": (0..6).map(|i| json!({"period_id": i + 1, "start_time": times[i], "end_time": times[i + 1]})).collect::<Vec<_>>(),
                "details": {"horizon": "1440", "increment": "240", "total_periods": "6"}
            }),
        ),
        (
            "set of shifts",
            json!({"value": (0..6).map(|i| json!({"shift_id": i + 1, "start_time": times[i], "duration": "480"})).collect::<Vec<_>>()}),
        ),
        (
            TASK_DEMAND_SHIFT,
            json!({"value": ([4, 8, 10, 7, 12, 4].iter().enumerate().map(|(i, d)| json!({"period_id": i + 1, "min_employees": d})).collect::<Vec<_>>())}),
        ),
    ]
}

fn post_office_entries() -> Vec<(&'static str, Value)> {
    let days: Vec<Value> = (1..=7).map(|d| json!({"period_id": d, "day": format!("Day {d}")})).collect();
    let shifts = |offset: usize| -> Vec<Value> {
        (1..=7).map(|d| json!({"shift_id": offset + d, "start_day": format!("Day {d}"), "duration": "5"})).collect()
    };
    vec![
        ("set of periods", json!({"value": days, "details": {"horizon": "7 days", "increment": "1 day"}})),
        (
            "set of workload types",
            json!({"value": [{"workload_type": "Full-time", "workload": 1}, {"workload_type": "Part-time", "workload": 0.5}]}),
        ),
        ("daily working hours", json!({"value": {"full_time_hours_per_day": 8}})),
        (
            "set of workload-specific shifts",
            json!({
                "value": [
                    {"workload_type": "Full-time", "shifts": shifts(0)},
                    {"workload_type": "Part-time", "shifts": shifts(7)}
                ],
                "total_shifts": 14
            }),
        ),
        (
            TASK_DEMAND_DAYS,
            json!({
                "value": ([136, 104, 120, 152, 112, 128, 88].iter().enumerate().map(|(i, h)| json!({"period_id": i + 1, "requirement": h})).collect::<Vec<_>>()),
                "unit": "hours"
            }),
        ),
        (
            "cost of each workload type",
            json!({"value": [{"workload_type": "Full-time", "cost": 600}, {"workload_type": "Part-time", "cost": 200}]}),
        ),
        (TASK_CAP, json!({"value": [{"workload_type": "Part-time", "upper_bound": 25}]})),
    ]
}

fn build(pt: ProblemType, entries: &[(&str, Value)], nodes: &[&str]) -> Result<Assembly, AssembleError> {
    build_model(
        &bundled_graph(pt),
        &store(entries),
        &ActivationReport::from_nodes(nodes.iter().copied()),
        &AssembleOptions::default(),
    )
}

fn rhs(m: &ModelIr, family: &str) -> Vec<f64> {
    m.family(family).unwrap().rows.iter().map(|r| r.rhs).collect()
}

#[test]
fn bus_model() {
    let m = build(ProblemType::ShiftScheduling, &bus_entries(), &["Minimise Total Number of Employees"]).unwrap().model;
    assert_eq!(m.vars.len(), 6);
    assert_eq!(rhs(&m, "demand"), vec![4.0, 8.0, 10.0, 7.0, 12.0, 4.0]);
    assert_eq!(m.objective.terms.len(), 6);
    assert!(m.objective.terms.iter().all(|t| t.coef == 1.0));
    // Period 1 is covered by the shift starting at 20:00 and the one at 00:00.
    let first = &m.family("demand").unwrap().rows[0];
    let names: Vec<&str> = first.terms.iter().map(|t| m.vars[t.var].name.as_str()).collect();
    assert_eq!(names, vec!["x_1", "x_6"]);
    assert!(m.warnings.is_empty());
}

#[test]
fn post_office_model() {
    let a = build(ProblemType::DaysOffScheduling, &post_office_entries(), &["Minimise Total Labour Cost"]).unwrap();
    let m = &a.model;
    assert_eq!(m.vars.len(), 14);
    assert_eq!(rhs(m, "demand"), vec![136.0, 104.0, 120.0, 152.0, 112.0, 128.0, 88.0]);
    assert_eq!(rhs(m, "group_cap"), vec![25.0]);
    let cap = &m.family("group_cap").unwrap().rows[0];
    assert_eq!(cap.terms.iter().map(|t| t.var).collect::<Vec<_>>(), (7..14).collect::<Vec<_>>());
    let coefs: Vec<f64> = m.objective.terms.iter().map(|t| t.coef).collect();
    assert_eq!(coefs, [vec![600.0; 7], vec![200.0; 7]].concat());
    // Day 1 is worked by shifts starting on days 1, 4, 5, 6, 7.
    let day1 = &m.family("demand").unwrap().rows[0];
    let ft: Vec<u32> = day1.terms.iter().filter(|t| t.coef == 8.0).map(|t| m.vars[t.var].index[0]).collect();
    assert_eq!(ft, vec![1, 4, 5, 6, 7]);
    assert!(day1.terms.iter().filter(|t| t.coef == 4.0).count() == 5);
}

#[test]
fn overtime_adds_linked_variables() {
    let mut entries = bus_entries();
    entries.push((TASK_OVERTIME, json!({"value": {"max_overtime_periods": 1, "cost_per_overtime_period": 10}})));
    entries.push((
        "cost of each shift",
        json!({"value": (1..=6).map(|s| json!({"shift_id": s, "cost": 100})).collect::<Vec<_>>()}),
    ));
    let m = build(ProblemType::ShiftScheduling, &entries, &["Minimise Total Labour Cost", "Overtimes"]).unwrap().model;
    assert_eq!(m.vars.len(), 6 + 12);
    assert_eq!(m.family("overtime_link").unwrap().rows.len(), 6);
    // y_{6,1} covers periods 6, 1 and 2.
    let y61 = m.var_index("y_6_1").unwrap();
    let covering: Vec<&str> = m
        .family("demand")
        .unwrap()
        .rows
        .iter()
        .filter(|r| r.terms.iter().any(|t| t.var == y61))
        .map(|r| r.name.as_str())
        .collect();
    assert_eq!(covering, vec!["demand_1", "demand_2", "demand_6"]);
    let obj_y61 = m.objective.terms.iter().find(|t| t.var == y61).unwrap().coef;
    assert_eq!(obj_y61, 10.0);
    assert!(m.objective.terms.iter().all(|t| m.vars[t.var].name != "y_1_0"));
}

#[test]
fn configured_overtime_bound_overrides() {
    let mut entries = bus_entries();
    entries.push((TASK_OVERTIME, json!({"value": {"max_overtime_periods": 1}})));
    let opts = AssembleOptions { max_overtime_periods: Some(2) };
    let a = build_model(
        &bundled_graph(ProblemType::ShiftScheduling),
        &store(&entries),
        &ActivationReport::default(),
        &opts,
    )
    .unwrap();
    assert_eq!(a.model.vars.len(), 6 + 18);
}

#[test]
fn overtime_without_bound_is_an_error() {
    let mut s = store(&bus_entries());
    s.absent.insert(TASK_OVERTIME.into(), Absence::Empty);
    let report = ActivationReport::from_nodes(["Overtimes"]);
    let err = build_model(&bundled_graph(ProblemType::ShiftScheduling), &s, &report, &AssembleOptions::default())
        .unwrap_err();
    assert_eq!(err, AssembleError::OvertimeBoundUnknown);
}

#[test]
fn weekend_ratio_and_total() {
    let mut entries = post_office_entries();
    entries.push((TASK_WEEKEND_OFF, json!({"value": {"rest_period_ids": [6, 7], "min_fraction": 0.25}})));
    entries.push((TASK_TOTAL, json!({"value": {"total_employees": 30}})));
    let m = build(ProblemType::DaysOffScheduling, &entries, &[]).unwrap().model;
    let row = &m.family("weekend_off").unwrap().rows[0];
    // Only shifts starting on Day 1 rest on Days 6 and 7.
    let positive: Vec<&str> = row.terms.iter().filter(|t| t.coef > 0.0).map(|t| m.vars[t.var].name.as_str()).collect();
    assert_eq!(positive, vec!["x_1", "x_8"]);
    assert!(row.terms.iter().all(|t| (t.coef - 0.75).abs() < 1e-12 || (t.coef + 0.25).abs() < 1e-12));
    let total = &m.family("total").unwrap().rows[0];
    assert_eq!((total.sense, total.rhs, total.terms.len()), (Sense::Eq, 30.0, 14));
}

#[test]
fn absent_optional_task_warns() {
    let mut s = store(&bus_entries());
    s.absent.insert(TASK_CAP.into(), Absence::Empty);
    let m = build_model(
        &bundled_graph(ProblemType::ShiftScheduling),
        &s,
        &ActivationReport::default(),
        &AssembleOptions::default(),
    )
    .unwrap()
    .model;
    assert!(m.family("group_cap").is_none());
    assert_eq!(m.warnings.len(), 1);
    assert!(m.warnings[0].starts_with("WARNING:"));
}

#[test]
fn activated_node_without_task_is_an_error() {
    let err = build(ProblemType::ShiftScheduling, &bus_entries(), &["Shift Group Limit"]).unwrap_err();
    assert!(matches!(err, AssembleError::ActivatedWithoutExtraction { .. }));
}

#[test]
fn cost_objective_without_costs() {
    let err = build(ProblemType::ShiftScheduling, &bus_entries(), &["Minimise Total Labour Cost"]).unwrap_err();
    assert_eq!(err, AssembleError::NoCostData);
}

#[test]
fn provenance_points_at_graph_nodes() {
    let g = bundled_graph(ProblemType::DaysOffScheduling);
    let m = build(ProblemType::DaysOffScheduling, &post_office_entries(), &[]).unwrap().model;
    for (component, id) in &m.provenance {
        assert!(g.node_by_id(id).is_some(), "{component} -> {id}");
    }
    assert!(m.provenance.contains_key("constraint:demand"));
    assert!(m.provenance.contains_key("param:c"));
}

#[test]
fn latex_sections_in_order_and_deterministic() {
    let m = build(ProblemType::DaysOffScheduling, &post_office_entries(), &[]).unwrap().model;
    let tex = render_latex(&m);
    assert_eq!(tex, render_latex(&m));
    let order = [
        "\\section*{Sets}",
        "\\section*{Parameters}",
        "\\section*{Decision Variables}",
        "\\section*{Objective}",
        "\\section*{Constraints}",
    ];
    let pos: Vec<usize> = order.iter().map(|h| tex.find(h).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(tex.matches("\\begin{").count(), tex.matches("\\end{").count());
    // Every parameter and set symbol in a template is defined.
    for c in &m.constraints {
        for sym in ["\\mathrm{lb}", "w_s", "B_k"] {
            if c.template.contains(sym) {
                let bare = sym.trim_start_matches("\\mathrm{").split(['_', '}']).next().unwrap();
                assert!(m.param(bare).is_some(), "{sym} unbound");
            }
        }
    }
}

#[test]
fn lp_rendering() {
    let m = build(ProblemType::ShiftScheduling, &bus_entries(), &[]).unwrap().model;
    let lp = render_lp(&m);
    assert!(lp.starts_with("Minimize\n obj: x_1 + x_2"));
    assert!(lp.contains(" demand_1: x_1 + x_6 >= 4\n"));
    assert!(lp.contains("Generals\n x_1 x_2 x_3 x_4 x_5 x_6\n"));
    assert!(lp.ends_with("End\n"));

    let mut m = m;
    m.vars[2].domain = Domain::NonnegContinuous;
    let lp = render_lp(&m);
    assert!(lp.contains("Generals\n x_1 x_2 x_4 x_5 x_6\n"));
    assert!(lp.contains(" x_3 >= 0\n"));
}

#[test]
fn lp_empty_row_and_names() {
    assert_eq!(sanitize_name("S^{off}"), "S__off_");
    assert_eq!(sanitize_name("1st"), "n1st");
    let mut m = build(ProblemType::ShiftScheduling, &bus_entries(), &[]).unwrap().model;
    m.constraints[0].rows[0].terms.clear();
    assert!(render_lp(&m).contains(" demand_1: 0 x_1 >= 4\n"));
}
