//! Stage 3: rule-based model assembly.
//!
//! Sets come straight from extracted data. Coverage, costs and rest-day
//! subsets are computed here, never extracted. Constraint families are
//! instantiated from fixed templates and every coefficient is numeric.

mod costs;
mod coverage;
mod latex;
mod lp;
mod model;
mod sets;
mod value;

use std::collections::BTreeSet;

use serde_json::Value;
use thiserror::Error;

use crate::extract::ExtractionStore;
use crate::graph::{ModellingGraph, ProblemType};
use crate::identify::ActivationReport;

pub use costs::{derive_costs, ShiftCosts};
pub use coverage::{coverage_matrix, overtime_coverage};
pub use latex::render_latex;
pub use lp::{render_lp, sanitize_name};
pub use model::{
    fmt_num, ConstraintFamily, Domain, IndexSet, ModelIr, Objective, ObjectiveSense, Param, ParamValues, Row, Sense,
    Term, VarFamily, Variable,
};
pub use sets::{build_periods, build_shifts, Axis, Break, Period, Shift, TimeUnit};

pub const TASK_DEMAND_SHIFT: &str = "minimum number of employees required for each period";
pub const TASK_DEMAND_DAYS: &str = "minimum labour requirement for each period";
pub const TASK_OVERTIME: &str = "overtime options";
pub const TASK_CAP: &str = "upper limit on a group of shifts";
pub const TASK_TOTAL: &str = "total number of employees to assign";
pub const TASK_WEEKEND_OFF: &str = "weekend-off requirement";

const NODE_COST_OBJECTIVE: &str = "Minimise Total Labour Cost";
const NODE_COUNT_OBJECTIVE: &str = "Minimise Total Number of Employees";
const OVERTIME_NODES: &[&str] = &[
    "Overtimes",
    "Maximum Overtime Periods",
    "Overtime Coverage of Periods",
    "Overtime Linking Constraint",
    "Number of Employees per Shift and Overtime",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssembleError {
    #[error("no usable output from extraction task `{task}`")]
    MissingExtraction { task: String },
    #[error("missing field `{field}`")]
    MissingField { field: String },
    #[error("cannot interpret `{field}` = {value}")]
    Coercion { field: String, value: String },
    #[error("inconsistent planning horizon: horizon {horizon}, increment {increment}, period count {count}")]
    InconsistentHorizon { horizon: String, increment: String, count: String },
    #[error("period {period} is misaligned: {detail}")]
    PeriodMisaligned { period: u32, detail: String },
    #[error("{what} ids must be 1..n without gaps, got {ids:?}")]
    NonContiguousIds { what: String, ids: Vec<i64> },
    #[error("shift {shift} starts outside the planning horizon")]
    ShiftOutsideHorizon { shift: i64 },
    #[error("{context} refers to unknown shift {shift}")]
    UnknownShift { shift: i64, context: String },
    #[error("{context} refers to unknown period {period}")]
    UnknownPeriod { period: i64, context: String },
    #[error("{context} refers to unknown workload type `{name}`")]
    UnknownWorkloadType { name: String, context: String },
    #[error("invalid break for shift {shift}: {detail}")]
    InvalidBreak { shift: i64, detail: String },
    #[error("no demand given for period(s) {periods:?}")]
    MissingDemand { periods: Vec<u32> },
    #[error("demand is in hours but shift {shift} has no daily hours (needs workload types and daily working hours)")]
    MissingHoursPerDay { shift: u32 },
    #[error("the labour cost objective was detected but no cost information was extracted")]
    NoCostData,
    #[error("node `{node}` was activated but task `{task}` was never run")]
    ActivatedWithoutExtraction { node: String, task: String },
    #[error("overtime is present but the maximum number of overtime periods is unknown; extract it or configure it")]
    OvertimeBoundUnknown,
    #[error("assembled model is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssembleOptions {
    /// Overrides the extracted maximum number of overtime periods per shift.
    pub max_overtime_periods: Option<u32>,
}

/// Assembled model with the derived data it was built from.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub model: ModelIr,
    pub axis: Axis,
    pub periods: Vec<Period>,
    pub shifts: Vec<Shift>,
    pub coverage: Vec<Vec<u8>>,
}

struct Builder<'a> {
    graph: &'a ModellingGraph,
    store: &'a ExtractionStore,
    activated: &'a BTreeSet<String>,
    ir: ModelIr,
}

impl<'a> Builder<'a> {
    fn provenance(&mut self, component: &str, node: &str) {
        if let Some(n) = self.graph.node_by_name(node) {
            self.ir.provenance.insert(component.to_string(), n.id.clone());
        }
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.ir.warnings.push(msg);
    }

    /// Output of an optional task: `Some` when extracted, `None` (with a
    /// warning) when it ran without usable output or was not planned.
    fn optional(&mut self, task: &str, nodes: &[&str], what: &str) -> Result<Option<&'a Value>, AssembleError> {
        let store: &'a ExtractionStore = self.store;
        if let Some(v) = store.entries.get(task).and_then(|e| e.get("value")) {
            return Ok(Some(v));
        }
        if self.store.absent.contains_key(task) {
            self.warn(format!("WARNING: {what} omitted because task `{task}` returned no usable information"));
            return Ok(None);
        }
        if let Some(node) = nodes.iter().find(|n| self.activated.contains(**n)) {
            return Err(AssembleError::ActivatedWithoutExtraction { node: node.to_string(), task: task.to_string() });
        }
        Ok(None)
    }

    fn add_var(&mut self, family: &str, index: Vec<u32>) -> usize {
        let name =
            sanitize_name(&format!("{family}_{}", index.iter().map(u32::to_string).collect::<Vec<_>>().join("_")));
        self.ir.vars.push(Variable {
            name,
            family: family.to_string(),
            index,
            domain: Domain::NonnegInteger,
            lower: 0.0,
            upper: None,
        });
        self.ir.vars.len() - 1
    }
}

fn terms(pairs: impl IntoIterator<Item = (usize, f64)>) -> Vec<Term> {
    let mut out: Vec<Term> =
        pairs.into_iter().filter(|(_, c)| *c != 0.0).map(|(var, coef)| Term { var, coef }).collect();
    out.sort_by_key(|t| t.var);
    out
}

struct Demand {
    lb: Vec<f64>,
    hours: bool,
}

fn demand(problem_type: ProblemType, store: &ExtractionStore, periods: &[Period]) -> Result<Demand, AssembleError> {
    let (task, field) = match problem_type {
        ProblemType::ShiftScheduling => (TASK_DEMAND_SHIFT, "min_employees"),
        ProblemType::DaysOffScheduling => (TASK_DEMAND_DAYS, "requirement"),
    };
    let entry = store.entries.get(task).ok_or_else(|| AssembleError::MissingExtraction { task: task.to_string() })?;
    let items = value::array(&format!("{task}.value"), value::field(task, entry, "value")?)?;
    let mut lb = vec![None; periods.len()];
    for item in items {
        let id = value::integer("demand.period_id", value::field("demand", item, "period_id")?)?;
        let slot = usize::try_from(id - 1)
            .ok()
            .and_then(|i| lb.get_mut(i))
            .ok_or(AssembleError::UnknownPeriod { period: id, context: "demand".into() })?;
        let x = value::number(&format!("demand.{field}"), value::field("demand", item, field)?)?;
        if x < 0.0 {
            return Err(AssembleError::Coercion { field: format!("demand of period {id}"), value: x.to_string() });
        }
        *slot = Some(x);
    }
    let missing: Vec<u32> = lb.iter().enumerate().filter(|(_, x)| x.is_none()).map(|(t, _)| t as u32 + 1).collect();
    if !missing.is_empty() {
        return Err(AssembleError::MissingDemand { periods: missing });
    }
    let hours = entry.get("unit").and_then(Value::as_str).is_some_and(|u| u.to_ascii_lowercase().contains("hour"));
    Ok(Demand { lb: lb.into_iter().map(|x| x.expect("checked")).collect(), hours })
}

/// Builds the complete model for an extracted instance.
pub fn build_model(
    graph: &ModellingGraph,
    store: &ExtractionStore,
    report: &ActivationReport,
    options: &AssembleOptions,
) -> Result<Assembly, AssembleError> {
    let pt = graph.problem_type;
    let (axis, periods) = build_periods(pt, store)?;
    let (shifts, shift_warnings) = build_shifts(pt, store, &axis, &periods)?;
    let a = coverage_matrix(&periods, &shifts, &axis);

    let mut b = Builder {
        graph,
        store,
        activated: &report.activated_nodes,
        ir: ModelIr {
            problem_type: pt,
            sets: Vec::new(),
            params: Vec::new(),
            var_families: Vec::new(),
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense: ObjectiveSense::Minimize,
                description: String::new(),
                template: String::new(),
                terms: Vec::new(),
            },
            provenance: Default::default(),
            warnings: Vec::new(),
        },
    };
    for w in shift_warnings {
        b.warn(w);
    }

    let unit_word = match axis.unit {
        TimeUnit::Minutes => "periods",
        TimeUnit::Days => "days",
    };
    b.ir.sets.push(IndexSet {
        symbol: "T".into(),
        description: format!("{unit_word} of the planning horizon"),
        members: periods.iter().map(|p| p.label.clone()).collect(),
        subset_of: None,
    });
    b.provenance("set:T", "Periods");
    b.ir.sets.push(IndexSet {
        symbol: "S".into(),
        description: "shifts".into(),
        members: shifts.iter().map(|s| s.label.clone()).collect(),
        subset_of: None,
    });
    b.provenance("set:S", "Shifts");

    // Overtime.
    let overtime_entry = b.optional(TASK_OVERTIME, OVERTIME_NODES, "overtime")?.cloned();
    let overtime_active =
        overtime_entry.is_some() || OVERTIME_NODES.iter().any(|n| report.activated_nodes.contains(*n));
    let (max_ot, ot_cost) = if pt == ProblemType::ShiftScheduling && overtime_active {
        let extracted = match &overtime_entry {
            Some(v) => Some(value::non_negative_integer(
                "overtime options.max_overtime_periods",
                value::field("overtime options", v, "max_overtime_periods")?,
            )?),
            None => None,
        };
        let max = options.max_overtime_periods.or(extracted).ok_or(AssembleError::OvertimeBoundUnknown)?;
        let cost = match overtime_entry.as_ref().and_then(|v| v.get("cost_per_overtime_period")) {
            None | Some(Value::Null) => None,
            Some(c) => Some(value::number("overtime options.cost_per_overtime_period", c)?),
        };
        (max, cost)
    } else {
        (0, None)
    };

    let demand = demand(pt, store, &periods)?;
    let weights: Vec<f64> = if demand.hours {
        shifts
            .iter()
            .map(|s| s.hours_per_day.ok_or(AssembleError::MissingHoursPerDay { shift: s.id }))
            .collect::<Result<_, _>>()?
    } else {
        vec![1.0; shifts.len()]
    };

    b.ir.params.push(Param {
        symbol: "lb".into(),
        description: if demand.hours {
            "minimum labour hours required in period t".into()
        } else {
            "minimum number of employees required in period t".into()
        },
        indices: vec!["T".into()],
        values: ParamValues::Vector(demand.lb.clone()),
    });
    b.provenance("param:lb", "Minimum labour demand per period");
    b.ir.params.push(Param {
        symbol: "a".into(),
        description: format!("1 if shift s works during {unit_word} t"),
        indices: vec!["T".into(), "S".into()],
        values: ParamValues::Matrix(a.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect()),
    });
    b.provenance(
        "param:a",
        match pt {
            ProblemType::ShiftScheduling => "Shift Coverage of Periods",
            ProblemType::DaysOffScheduling => "Shift Coverage of Days",
        },
    );
    if demand.hours {
        b.ir.params.push(Param {
            symbol: "w".into(),
            description: "daily working hours of an employee on shift s".into(),
            indices: vec!["S".into()],
            values: ParamValues::Vector(weights.clone()),
        });
        b.provenance("param:w", "Daily Working Hours");
    }

    // Variables.
    b.ir.var_families.push(VarFamily {
        symbol: "x".into(),
        description: "number of employees assigned to shift s".into(),
        indices: vec!["S".into()],
        domain: Domain::NonnegInteger,
    });
    b.provenance("var:x", "Number of Employees per Shift");
    let x: Vec<usize> = shifts.iter().map(|s| b.add_var("x", vec![s.id])).collect();

    let mut y: Vec<Vec<usize>> = Vec::new();
    let v = if max_ot > 0 {
        let v = overtime_coverage(&periods, &shifts, max_ot, &axis);
        b.ir.sets.push(IndexSet {
            symbol: "O".into(),
            description: "number of overtime periods worked after a shift".into(),
            members: (0..=max_ot).map(|o| o.to_string()).collect(),
            subset_of: None,
        });
        b.provenance("set:O", "Overtimes");
        b.ir.params.push(Param {
            symbol: "v".into(),
            description: "1 if shift s extended by o overtime periods works during period t".into(),
            indices: vec!["T".into(), "O".into(), "S".into()],
            values: ParamValues::Tensor3(
                v.iter().map(|per_o| per_o.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect()).collect(),
            ),
        });
        b.provenance("param:v", "Overtime Coverage of Periods");
        b.ir.var_families.push(VarFamily {
            symbol: "y".into(),
            description: "number of employees on shift s working o overtime periods".into(),
            indices: vec!["S".into(), "O".into()],
            domain: Domain::NonnegInteger,
        });
        b.provenance("var:y", "Number of Employees per Shift and Overtime");
        y = shifts.iter().map(|s| (0..=max_ot).map(|o| b.add_var("y", vec![s.id, o])).collect()).collect();
        Some(v)
    } else {
        if overtime_active {
            b.warn("overtime allows 0 extra periods; overtime variables omitted".into());
        }
        None
    };

    // Demand coverage.
    let weighted = if demand.hours { " w_s" } else { "" };
    let template = match &v {
        Some(_) => format!("\\sum_{{s \\in S}} \\sum_{{o \\in O}} v_{{t,o,s}}{weighted} y_{{s,o}} \\geq \\mathrm{{lb}}_t \\quad \\forall t \\in T"),
        None => format!("\\sum_{{s \\in S}} a_{{t,s}}{weighted} x_s \\geq \\mathrm{{lb}}_t \\quad \\forall t \\in T"),
    };
    let rows = periods
        .iter()
        .enumerate()
        .map(|(t, p)| {
            let lhs = match &v {
                Some(v) => terms((0..shifts.len()).flat_map(|s| {
                    let y = &y;
                    let w = weights[s];
                    (0..=max_ot as usize).map(move |o| (y[s][o], v[t][o][s] as f64 * w))
                })),
                None => terms((0..shifts.len()).map(|s| (x[s], a[t][s] as f64 * weights[s]))),
            };
            Row { name: format!("demand_{}", p.id), terms: lhs, sense: Sense::Ge, rhs: demand.lb[t] }
        })
        .collect();
    b.ir.constraints.push(ConstraintFamily {
        label: "demand".into(),
        description: if demand.hours {
            "labour hours worked in each period meet the requirement".into()
        } else {
            "employees working in each period meet the requirement".into()
        },
        template,
        rows,
    });
    b.provenance("constraint:demand", "Labour Demand Constraint");

    if v.is_some() {
        let rows = shifts
            .iter()
            .enumerate()
            .map(|(s, sh)| Row {
                name: format!("link_{}", sh.id),
                terms: terms(std::iter::once((x[s], 1.0)).chain(y[s].iter().map(|&j| (j, -1.0)))),
                sense: Sense::Eq,
                rhs: 0.0,
            })
            .collect();
        b.ir.constraints.push(ConstraintFamily {
            label: "overtime_link".into(),
            description: "every employee on a shift works some number of overtime periods".into(),
            template: "x_s - \\sum_{o \\in O} y_{s,o} = 0 \\quad \\forall s \\in S".into(),
            rows,
        });
        b.provenance("constraint:overtime_link", "Overtime Linking Constraint");
    }

    // Caps on groups of shifts.
    let cap_nodes: &[&str] = &["Shift Group Limit", "Workload Group Limit", "Shift Group Upper Bound Constraint"];
    if let Some(items) = b.optional(TASK_CAP, cap_nodes, "upper limit on a group of shifts")?.cloned() {
        let mut rows = Vec::new();
        let mut bounds = Vec::new();
        let mut groups = Vec::new();
        for (k, item) in value::array("upper limit.value", &items)?.iter().enumerate() {
            let members = cap_members(item, &shifts)?;
            let bound = value::number("upper limit.upper_bound", value::field("upper limit", item, "upper_bound")?)?;
            groups.push(IndexSet {
                symbol: format!("S_{{{}}}", k + 1),
                description: cap_description(item),
                members: members.iter().map(|&s| shifts[s].id.to_string()).collect(),
                subset_of: Some("S".into()),
            });
            bounds.push(bound);
            rows.push(Row {
                name: format!("cap_{}", k + 1),
                terms: terms(members.iter().map(|&s| (x[s], 1.0))),
                sense: Sense::Le,
                rhs: bound,
            });
        }
        if !rows.is_empty() {
            b.ir.sets.push(IndexSet {
                symbol: "K".into(),
                description: "limited groups of shifts".into(),
                members: groups.iter().map(|g| g.description.clone()).collect(),
                subset_of: None,
            });
            b.ir.sets.extend(groups);
            b.ir.params.push(Param {
                symbol: "B".into(),
                description: "upper limit on the employees assigned to group k".into(),
                indices: vec!["K".into()],
                values: ParamValues::Vector(bounds),
            });
            b.provenance(
                "param:B",
                if pt == ProblemType::ShiftScheduling { "Shift Group Limit" } else { "Workload Group Limit" },
            );
            b.ir.constraints.push(ConstraintFamily {
                label: "group_cap".into(),
                description: "employees assigned to a group of shifts stay within its limit".into(),
                template: "\\sum_{s \\in S_k} x_s \\leq B_k \\quad \\forall k \\in K".into(),
                rows,
            });
            b.provenance("constraint:group_cap", "Shift Group Upper Bound Constraint");
        }
    }

    // Total workforce.
    let total_nodes: &[&str] = &["Total Workforce Size", "Total Workforce Equality Constraint"];
    if let Some(item) = b.optional(TASK_TOTAL, total_nodes, "total workforce equality")?.cloned() {
        let n = value::number("total employees", value::field("total employees", &item, "total_employees")?)?;
        b.ir.params.push(Param {
            symbol: "N".into(),
            description: "number of employees to assign".into(),
            indices: vec![],
            values: ParamValues::Scalar(n),
        });
        b.provenance("param:N", "Total Workforce Size");
        b.ir.constraints.push(ConstraintFamily {
            label: "total".into(),
            description: "all employees are assigned to some shift".into(),
            template: "\\sum_{s \\in S} x_s = N".into(),
            rows: vec![Row {
                name: "total".into(),
                terms: terms(x.iter().map(|&j| (j, 1.0))),
                sense: Sense::Eq,
                rhs: n,
            }],
        });
        b.provenance("constraint:total", "Total Workforce Equality Constraint");
    }

    // Weekend-off ratio.
    let ratio_nodes: &[&str] = &["Weekend-off Fraction", "Weekend-off Ratio Constraint"];
    if pt == ProblemType::DaysOffScheduling {
        if let Some(item) = b.optional(TASK_WEEKEND_OFF, ratio_nodes, "weekend-off requirement")?.cloned() {
            let rest: BTreeSet<u32> =
                value::array("rest_period_ids", value::field("weekend-off", &item, "rest_period_ids")?)?
                    .iter()
                    .map(|d| costs::period_day(d, &periods, "weekend-off requirement"))
                    .collect::<Result<_, _>>()?;
            let rho = value::number("min_fraction", value::field("weekend-off", &item, "min_fraction")?)?;
            if !(0.0..=1.0).contains(&rho) {
                return Err(AssembleError::Coercion {
                    field: "weekend-off requirement.min_fraction".into(),
                    value: rho.to_string(),
                });
            }
            let off: Vec<usize> =
                (0..shifts.len()).filter(|&s| shifts[s].rest_days(&axis).is_superset(&rest)).collect();
            let rest_labels: Vec<String> = rest.iter().map(|&d| periods[d as usize].label.clone()).collect();
            b.ir.sets.push(IndexSet {
                symbol: "S^{off}".into(),
                description: format!("shifts resting on all of {}", rest_labels.join(", ")),
                members: off.iter().map(|&s| shifts[s].id.to_string()).collect(),
                subset_of: Some("S".into()),
            });
            b.provenance("set:S^{off}", "Rest Days of Shifts");
            b.ir.params.push(Param {
                symbol: "\\rho".into(),
                description: "minimum fraction of employees resting on those days".into(),
                indices: vec![],
                values: ParamValues::Scalar(rho),
            });
            b.provenance("param:rho", "Weekend-off Fraction");
            b.ir.constraints.push(ConstraintFamily {
                label: "weekend_off".into(),
                description: "enough employees have the stated days off".into(),
                template: "\\sum_{s \\in S^{off}} x_s - \\rho \\sum_{s \\in S} x_s \\geq 0".into(),
                rows: vec![Row {
                    name: "weekend_off".into(),
                    terms: terms((0..shifts.len()).map(|s| (x[s], if off.contains(&s) { 1.0 - rho } else { -rho }))),
                    sense: Sense::Ge,
                    rhs: 0.0,
                }],
            });
            b.provenance("constraint:weekend_off", "Weekend-off Ratio Constraint");
        }
    }

    // Objective.
    let costs = derive_costs(pt, store, &axis, &periods, &shifts, &a)?;
    let cost_activated = report.activated_nodes.contains(NODE_COST_OBJECTIVE);
    let count_activated = report.activated_nodes.contains(NODE_COUNT_OBJECTIVE);
    if cost_activated && count_activated {
        b.warn("both objectives were detected; minimising labour cost".into());
    }
    let use_cost = cost_activated || (costs.is_some() && !count_activated);
    if use_cost {
        let c = costs.ok_or(AssembleError::NoCostData)?;
        b.ir.params.push(Param {
            symbol: "c".into(),
            description: format!("cost of one employee on shift s (from {})", c.sources.join(" and ")),
            indices: vec!["S".into()],
            values: ParamValues::Vector(c.costs.clone()),
        });
        b.provenance(
            "param:c",
            if pt == ProblemType::ShiftScheduling { "Shift Cost" } else { "Employee Cost per Workload Type" },
        );
        let mut pairs: Vec<(usize, f64)> = x.iter().zip(&c.costs).map(|(&j, &cs)| (j, cs)).collect();
        let mut template = "\\min \\sum_{s \\in S} c_s x_s".to_string();
        if let (Some(cot), false) = (ot_cost, y.is_empty()) {
            b.ir.params.push(Param {
                symbol: "c^{ot}".into(),
                description: "cost of one employee working one overtime period".into(),
                indices: vec![],
                values: ParamValues::Scalar(cot),
            });
            b.provenance("param:c^{ot}", "Overtime Cost");
            for ys in &y {
                for (o, &j) in ys.iter().enumerate() {
                    pairs.push((j, o as f64 * cot));
                }
            }
            template.push_str(" + \\sum_{s \\in S} \\sum_{o \\in O} o \\, c^{ot} y_{s,o}");
        }
        b.ir.objective = Objective {
            sense: ObjectiveSense::Minimize,
            description: "total labour cost".into(),
            template,
            terms: terms(pairs),
        };
        b.provenance("objective", NODE_COST_OBJECTIVE);
    } else {
        b.ir.objective = Objective {
            sense: ObjectiveSense::Minimize,
            description: "total number of employees".into(),
            template: "\\min \\sum_{s \\in S} x_s".into(),
            terms: terms(x.iter().map(|&j| (j, 1.0))),
        };
        b.provenance("objective", NODE_COUNT_OBJECTIVE);
    }
    b.provenance("domain", "Non-negativity and Integrality");

    b.ir.check().map_err(AssembleError::Inconsistent)?;
    Ok(Assembly { model: b.ir, axis, periods, shifts, coverage: a })
}

fn cap_description(item: &Value) -> String {
    let wt = item.get("workload_type").and_then(Value::as_str).filter(|s| !s.trim().is_empty());
    let ids = item.get("shift_ids").and_then(Value::as_array).filter(|a| !a.is_empty());
    match (wt, ids) {
        (Some(wt), None) => format!("{wt} shifts"),
        (Some(wt), Some(ids)) => format!("{wt} shifts {}", Value::Array(ids.clone())),
        (None, Some(ids)) => format!("shifts {}", Value::Array(ids.clone())),
        (None, None) => "all shifts".into(),
    }
}

/// Indices of the shifts a cap applies to.
fn cap_members(item: &Value, shifts: &[Shift]) -> Result<Vec<usize>, AssembleError> {
    let wt = item.get("workload_type").and_then(Value::as_str).map(str::trim).filter(|s| !s.is_empty());
    let mut pool: Vec<usize> = (0..shifts.len())
        .filter(|&s| match (wt, &shifts[s].workload_type) {
            (Some(w), Some(sw)) => sw.eq_ignore_ascii_case(w),
            (Some(_), None) => false,
            (None, _) => true,
        })
        .collect();
    if let Some(w) = wt {
        if pool.is_empty() {
            return Err(AssembleError::UnknownWorkloadType { name: w.to_string(), context: "upper limit".into() });
        }
    }
    if let Some(ids) = item.get("shift_ids").and_then(Value::as_array).filter(|a| !a.is_empty()) {
        let mut chosen = Vec::new();
        for id in ids {
            let id = value::integer("upper limit.shift_ids", id)?;
            let s = pool
                .iter()
                .copied()
                .find(|&s| shifts[s].source_id == id)
                .ok_or(AssembleError::UnknownShift { shift: id, context: "upper limit".into() })?;
            if !chosen.contains(&s) {
                chosen.push(s);
            }
        }
        chosen.sort_unstable();
        pool = chosen;
    }
    Ok(pool)
}

#[cfg(test)]
mod tests;
