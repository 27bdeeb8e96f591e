//! Objective coefficients derived by rule from extracted cost components.

use std::collections::BTreeSet;

use serde_json::Value;

use super::sets::{Axis, Period, Shift};
use super::value;
use super::AssembleError;
use crate::extract::ExtractionStore;
use crate::graph::ProblemType;

pub const TASK_SHIFT_COST: &str = "cost of each shift";
pub const TASK_PERIOD_COST: &str = "cost of each period";
pub const TASK_WORKLOAD_COST: &str = "cost of each workload type";
pub const TASK_WEEKEND_BONUS: &str = "weekend bonus";

/// Per-shift costs with the components they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCosts {
    pub costs: Vec<f64>,
    pub sources: Vec<&'static str>,
}

/// Weekend bonus: amount per worked day and the 0-based bonus days.
pub fn weekend_bonus(
    store: &ExtractionStore,
    periods: &[Period],
) -> Result<Option<(f64, BTreeSet<u32>)>, AssembleError> {
    let Some(v) = store.entries.get(TASK_WEEKEND_BONUS).and_then(|e| e.get("value")) else {
        return Ok(None);
    };
    let amount = value::number("weekend bonus.bonus_per_day", value::field("weekend bonus", v, "bonus_per_day")?)?;
    let days = value::array("weekend bonus.bonus_period_ids", value::field("weekend bonus", v, "bonus_period_ids")?)?
        .iter()
        .map(|d| period_day(d, periods, "weekend bonus"))
        .collect::<Result<_, _>>()?;
    Ok(Some((amount, days)))
}

pub(crate) fn period_day(v: &Value, periods: &[Period], context: &str) -> Result<u32, AssembleError> {
    let id = value::integer(&format!("{context} period id"), v)?;
    periods
        .iter()
        .find(|p| p.id as i64 == id)
        .map(|p| p.start)
        .ok_or(AssembleError::UnknownPeriod { period: id, context: context.to_string() })
}

fn cost_list<'a>(store: &'a ExtractionStore, task: &str) -> Result<Option<&'a Vec<Value>>, AssembleError> {
    match store.entries.get(task).and_then(|e| e.get("value")) {
        Some(v) => value::array(&format!("{task}.value"), v).map(Some),
        None => Ok(None),
    }
}

/// `c_s` for every shift, or `None` when no cost component was extracted.
pub fn derive_costs(
    problem_type: ProblemType,
    store: &ExtractionStore,
    axis: &Axis,
    periods: &[Period],
    shifts: &[Shift],
    coverage: &[Vec<u8>],
) -> Result<Option<ShiftCosts>, AssembleError> {
    match problem_type {
        ProblemType::ShiftScheduling => clock_costs(store, periods, shifts, coverage),
        ProblemType::DaysOffScheduling => day_costs(store, axis, periods, shifts),
    }
}

fn clock_costs(
    store: &ExtractionStore,
    periods: &[Period],
    shifts: &[Shift],
    coverage: &[Vec<u8>],
) -> Result<Option<ShiftCosts>, AssembleError> {
    if let Some(items) = cost_list(store, TASK_PERIOD_COST)? {
        let mut per_period = vec![None; periods.len()];
        for item in items {
            let id = value::integer("period cost.period_id", value::field("period cost", item, "period_id")?)?;
            let slot = per_period
                .get_mut((id - 1).max(0) as usize)
                .filter(|_| id >= 1)
                .ok_or(AssembleError::UnknownPeriod { period: id, context: "period cost".into() })?;
            *slot = Some(value::number("period cost.cost", value::field("period cost", item, "cost")?)?);
        }
        let per_period: Vec<f64> = per_period
            .into_iter()
            .enumerate()
            .map(|(t, c)| c.ok_or(AssembleError::MissingField { field: format!("cost of period {}", t + 1) }))
            .collect::<Result<_, _>>()?;
        let costs = (0..shifts.len())
            .map(|s| (0..periods.len()).map(|t| coverage[t][s] as f64 * per_period[t]).sum())
            .collect();
        return Ok(Some(ShiftCosts { costs, sources: vec![TASK_PERIOD_COST] }));
    }
    if let Some(items) = cost_list(store, TASK_SHIFT_COST)? {
        let mut costs = vec![None; shifts.len()];
        for item in items {
            let sid = value::integer("shift cost.shift_id", value::field("shift cost", item, "shift_id")?)?;
            let idx = shifts
                .iter()
                .position(|s| s.source_id == sid)
                .ok_or(AssembleError::UnknownShift { shift: sid, context: "shift cost".into() })?;
            costs[idx] = Some(value::number("shift cost.cost", value::field("shift cost", item, "cost")?)?);
        }
        let costs = costs
            .into_iter()
            .zip(shifts)
            .map(|(c, s)| c.ok_or(AssembleError::MissingField { field: format!("cost of shift {}", s.source_id) }))
            .collect::<Result<_, _>>()?;
        return Ok(Some(ShiftCosts { costs, sources: vec![TASK_SHIFT_COST] }));
    }
    Ok(None)
}

fn day_costs(
    store: &ExtractionStore,
    axis: &Axis,
    periods: &[Period],
    shifts: &[Shift],
) -> Result<Option<ShiftCosts>, AssembleError> {
    let bonus = weekend_bonus(store, periods)?;
    let base = match cost_list(store, TASK_WORKLOAD_COST)? {
        Some(items) => {
            let table = items
                .iter()
                .map(|item| {
                    let name = value::text(
                        "workload cost.workload_type",
                        value::field("workload cost", item, "workload_type")?,
                    )?
                    .to_string();
                    let cost = value::number("workload cost.cost", value::field("workload cost", item, "cost")?)?;
                    Ok((name, cost))
                })
                .collect::<Result<Vec<_>, AssembleError>>()?;
            let costs = shifts
                .iter()
                .map(|s| match &s.workload_type {
                    Some(wt) => table.iter().find(|(n, _)| n.eq_ignore_ascii_case(wt)).map(|(_, c)| *c).ok_or(
                        AssembleError::UnknownWorkloadType { name: wt.clone(), context: "workload cost".into() },
                    ),
                    None if table.len() == 1 => Ok(table[0].1),
                    None => Err(AssembleError::MissingField {
                        field: format!("workload type of shift {} (needed to price it)", s.source_id),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(costs)
        }
        None => None,
    };
    if base.is_none() && bonus.is_none() {
        return Ok(None);
    }
    let mut sources = Vec::new();
    let mut costs = match base {
        Some(c) => {
            sources.push(TASK_WORKLOAD_COST);
            c
        }
        None => vec![0.0; shifts.len()],
    };
    if let Some((amount, days)) = bonus {
        sources.push(TASK_WEEKEND_BONUS);
        for (c, s) in costs.iter_mut().zip(shifts) {
            *c += amount * s.work_days(axis).intersection(&days).count() as f64;
        }
    }
    Ok(Some(ShiftCosts { costs, sources }))
}
