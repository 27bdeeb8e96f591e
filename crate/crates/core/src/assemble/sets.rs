//! Periods and shifts built from extracted data.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::Value;

use super::value::{self, Unit};
use super::AssembleError;
use crate::extract::ExtractionStore;
use crate::graph::ProblemType;

pub const TASK_PERIODS: &str = "set of periods";
pub const TASK_SHIFTS: &str = "set of shifts";
pub const TASK_WORKLOAD_SHIFTS: &str = "set of workload-specific shifts";
pub const TASK_WORKLOAD_TYPES: &str = "set of workload types";
pub const TASK_DAILY_HOURS: &str = "daily working hours";
pub const TASK_BREAKS: &str = "breaks within shifts";

const DAY_MINUTES: u32 = 1440;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    Minutes,
    Days,
}

/// The discretised planning horizon. Positions are offsets from the start
/// of period 1, so period `t` occupies `[(t-1)·t_size, t·t_size)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Axis {
    pub unit: TimeUnit,
    pub t_max: u32,
    pub t_size: u32,
    /// Clock minute at which period 1 starts (0 for day axes).
    pub origin: u32,
}

impl Axis {
    pub fn periods(&self) -> u32 {
        self.t_max / self.t_size
    }

    /// Clock label for an axis position (minutes axes only).
    pub fn clock_label(&self, pos: u32) -> String {
        let m = (self.origin + pos) % DAY_MINUTES;
        format!("{:02}:{:02}", m / 60, m % 60)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Period {
    pub id: u32,
    pub start: u32,
    pub end: u32,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Break {
    pub offset: u32,
    pub length: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shift {
    pub id: u32,
    /// Identifier used in the extraction, before any renumbering.
    pub source_id: i64,
    pub start: u32,
    pub duration: u32,
    pub breaks: Vec<Break>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workload_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hours_per_day: Option<f64>,
    pub label: String,
}

impl Shift {
    /// Days worked, as 0-based day indices (day axes).
    pub fn work_days(&self, axis: &Axis) -> BTreeSet<u32> {
        (0..self.duration.min(axis.t_max)).map(|k| (self.start + k) % axis.t_max).collect()
    }

    /// Days not worked, as 0-based day indices (day axes).
    pub fn rest_days(&self, axis: &Axis) -> BTreeSet<u32> {
        let work = self.work_days(axis);
        (0..axis.t_max).filter(|d| !work.contains(d)).collect()
    }
}

fn required<'a>(store: &'a ExtractionStore, task: &str) -> Result<&'a Vec<Value>, AssembleError> {
    let v = store.value(task).ok_or_else(|| AssembleError::MissingExtraction { task: task.to_string() })?;
    value::array(&format!("{task}.value"), v)
}

fn sorted_by_id<'a>(what: &str, items: &'a [Value], key: &str) -> Result<Vec<(i64, &'a Value)>, AssembleError> {
    let mut out = items
        .iter()
        .map(|item| Ok((value::integer(&format!("{what}.{key}"), value::field(what, item, key)?)?, item)))
        .collect::<Result<Vec<_>, AssembleError>>()?;
    out.sort_by_key(|(id, _)| *id);
    for (i, (id, _)) in out.iter().enumerate() {
        if *id != i as i64 + 1 {
            return Err(AssembleError::NonContiguousIds {
                what: what.to_string(),
                ids: out.iter().map(|(id, _)| *id).collect(),
            });
        }
    }
    Ok(out)
}

pub fn build_periods(problem_type: ProblemType, store: &ExtractionStore) -> Result<(Axis, Vec<Period>), AssembleError> {
    let items = required(store, TASK_PERIODS)?;
    if items.is_empty() {
        return Err(AssembleError::MissingExtraction { task: TASK_PERIODS.into() });
    }
    let details = store.get(TASK_PERIODS).and_then(|v| v.get("details")).filter(|d| d.is_object());
    let detail = |key: &str| details.and_then(|d| d.get(key)).filter(|v| !v.is_null());
    let sorted = sorted_by_id("period", items, "period_id")?;
    match problem_type {
        ProblemType::ShiftScheduling => clock_periods(&sorted, detail),
        ProblemType::DaysOffScheduling => day_periods(&sorted, detail),
    }
}

fn clock_periods<'a>(
    sorted: &[(i64, &Value)],
    detail: impl Fn(&str) -> Option<&'a Value>,
) -> Result<(Axis, Vec<Period>), AssembleError> {
    let mut clocks = Vec::with_capacity(sorted.len());
    for (id, item) in sorted {
        let what = format!("period {id}");
        let s = value::clock(&format!("{what}.start_time"), value::field(&what, item, "start_time")?)?;
        let e = value::clock(&format!("{what}.end_time"), value::field(&what, item, "end_time")?)?;
        clocks.push((s % DAY_MINUTES, e % DAY_MINUTES));
    }
    let origin = clocks[0].0;
    let span = |(s, e): (u32, u32)| match (e + DAY_MINUTES - s) % DAY_MINUTES {
        0 => DAY_MINUTES,
        d => d,
    };
    let count = sorted.len() as u32;
    let increment = match detail("increment") {
        Some(v) => value::positive_whole("set of periods.details.increment", v, Unit::Minutes)?,
        None => span(clocks[0]),
    };
    let horizon = match detail("horizon") {
        Some(v) => value::positive_whole("set of periods.details.horizon", v, Unit::Minutes)?,
        None => increment * count,
    };
    let total = match detail("total_periods") {
        Some(v) => value::non_negative_integer("set of periods.details.total_periods", v)?,
        None => count,
    };
    let inconsistent = || AssembleError::InconsistentHorizon {
        horizon: horizon.to_string(),
        increment: increment.to_string(),
        count: format!("{total} (listed {count})"),
    };
    if total != count || increment.checked_mul(count) != Some(horizon) || horizon > DAY_MINUTES {
        return Err(inconsistent());
    }
    let mut periods = Vec::with_capacity(sorted.len());
    for (i, &(s, e)) in clocks.iter().enumerate() {
        let rel = (s + DAY_MINUTES - origin) % DAY_MINUTES;
        if rel != i as u32 * increment || span((s, e)) != increment {
            return Err(AssembleError::PeriodMisaligned {
                period: i as u32 + 1,
                detail: format!(
                    "starts {} min after period 1 and lasts {} min; expected {} and {}",
                    rel,
                    span((s, e)),
                    i as u32 * increment,
                    increment
                ),
            });
        }
        periods.push(Period { id: i as u32 + 1, start: rel, end: rel + increment, label: String::new() });
    }
    let axis = Axis { unit: TimeUnit::Minutes, t_max: horizon, t_size: increment, origin };
    for p in &mut periods {
        p.label = format!("{}-{}", axis.clock_label(p.start), axis.clock_label(p.end));
    }
    Ok((axis, periods))
}

fn day_periods<'a>(
    sorted: &[(i64, &Value)],
    detail: impl Fn(&str) -> Option<&'a Value>,
) -> Result<(Axis, Vec<Period>), AssembleError> {
    let count = sorted.len() as u32;
    let increment = match detail("increment") {
        Some(v) => value::positive_whole("set of periods.details.increment", v, Unit::Days)?,
        None => 1,
    };
    let horizon = match detail("horizon") {
        Some(v) => value::positive_whole("set of periods.details.horizon", v, Unit::Days)?,
        None => count,
    };
    if increment != 1 || horizon != count {
        return Err(AssembleError::InconsistentHorizon {
            horizon: format!("{horizon} days"),
            increment: format!("{increment} days"),
            count: count.to_string(),
        });
    }
    let periods = sorted
        .iter()
        .enumerate()
        .map(|(i, (id, item))| {
            let label = match item.get("day") {
                Some(Value::String(s)) => s.trim().to_string(),
                Some(Value::Number(n)) => format!("Day {n}"),
                _ => format!("Day {id}"),
            };
            Period { id: i as u32 + 1, start: i as u32, end: i as u32 + 1, label }
        })
        .collect();
    Ok((Axis { unit: TimeUnit::Days, t_max: count, t_size: 1, origin: 0 }, periods))
}

/// Resolves a day reference to a 0-based index: a period label, `Day N`, or `N`.
pub fn day_index(what: &str, v: &Value, periods: &[Period]) -> Result<u32, AssembleError> {
    let bad = || AssembleError::Coercion { field: what.to_string(), value: v.to_string() };
    if let Value::String(s) = v {
        let s = s.trim();
        if let Some(p) = periods.iter().find(|p| p.label.eq_ignore_ascii_case(s)) {
            return Ok(p.start);
        }
        let lower = s.to_ascii_lowercase();
        if let Some(n) = lower.strip_prefix("day") {
            let n: u32 = n.trim().parse().map_err(|_| bad())?;
            return index_in_range(n, periods).ok_or_else(bad);
        }
    }
    let n = value::non_negative_integer(what, v).map_err(|_| bad())?;
    index_in_range(n, periods).ok_or_else(bad)
}

fn index_in_range(n: u32, periods: &[Period]) -> Option<u32> {
    (1..=periods.len() as u32).contains(&n).then(|| n - 1)
}

struct RawShift {
    source_id: i64,
    start: u32,
    start_clock: u32,
    duration: u32,
    workload_type: Option<String>,
}

pub fn build_shifts(
    problem_type: ProblemType,
    store: &ExtractionStore,
    axis: &Axis,
    periods: &[Period],
) -> Result<(Vec<Shift>, Vec<String>), AssembleError> {
    let mut warnings = Vec::new();
    let raw = match problem_type {
        ProblemType::ShiftScheduling => clock_shifts(store, axis)?,
        ProblemType::DaysOffScheduling => day_shifts(store, axis, periods)?,
    };
    if raw.is_empty() {
        return Err(AssembleError::MissingExtraction { task: TASK_SHIFTS.into() });
    }

    let hours = hours_per_day(store)?;
    let ids: Vec<i64> = raw.iter().map(|r| r.source_id).collect();
    let mut sorted_ids = ids.clone();
    sorted_ids.sort_unstable();
    let canonical = sorted_ids.iter().enumerate().all(|(i, id)| *id == i as i64 + 1);
    let mut order: Vec<usize> = (0..raw.len()).collect();
    if canonical {
        order.sort_by_key(|&i| raw[i].source_id);
    } else {
        warnings.push(format!("shift ids {ids:?} are not 1..{}; renumbered in listed order", raw.len()));
    }

    let breaks = breaks_by_shift(store, &raw)?;
    let mut shifts = Vec::with_capacity(raw.len());
    for (pos, &i) in order.iter().enumerate() {
        let r = &raw[i];
        let hours_per_day = match (&r.workload_type, &hours) {
            (Some(wt), Some((workloads, daily))) => {
                workloads.iter().find(|(name, _)| name.eq_ignore_ascii_case(wt)).map(|(_, w)| w * daily)
            }
            (None, Some((workloads, daily))) if workloads.len() == 1 => Some(workloads[0].1 * daily),
            _ => None,
        };
        let label = match axis.unit {
            TimeUnit::Minutes => format!("{}+{}min", axis.clock_label(r.start), r.duration),
            TimeUnit::Days => {
                let start = periods[r.start as usize].label.clone();
                match &r.workload_type {
                    Some(wt) => format!("{wt}, {start}, {} days", r.duration),
                    None => format!("{start}, {} days", r.duration),
                }
            }
        };
        let shift_breaks = breaks.get(&i).cloned().unwrap_or_default();
        shifts.push(Shift {
            id: pos as u32 + 1,
            source_id: r.source_id,
            start: r.start,
            duration: r.duration,
            breaks: shift_breaks,
            workload_type: r.workload_type.clone(),
            hours_per_day,
            label,
        });
    }
    Ok((shifts, warnings))
}

fn clock_shifts(store: &ExtractionStore, axis: &Axis) -> Result<Vec<RawShift>, AssembleError> {
    let items = required(store, TASK_SHIFTS)?;
    items
        .iter()
        .map(|item| {
            let id = value::integer("shift.shift_id", value::field("shift", item, "shift_id")?)?;
            let what = format!("shift {id}");
            let start_clock = value::clock(&format!("{what}.start_time"), value::field(&what, item, "start_time")?)?;
            let start = (start_clock % DAY_MINUTES + DAY_MINUTES - axis.origin) % DAY_MINUTES;
            if start >= axis.t_max {
                return Err(AssembleError::ShiftOutsideHorizon { shift: id });
            }
            let duration = value::positive_whole(
                &format!("{what}.duration"),
                value::field(&what, item, "duration")?,
                Unit::Minutes,
            )?;
            if duration > axis.t_max {
                return Err(AssembleError::Coercion {
                    field: format!("{what}.duration"),
                    value: format!("{duration} (horizon is {})", axis.t_max),
                });
            }
            Ok(RawShift { source_id: id, start, start_clock: start_clock % DAY_MINUTES, duration, workload_type: None })
        })
        .collect()
}

fn day_shift(
    item: &Value,
    axis: &Axis,
    periods: &[Period],
    workload_type: Option<String>,
) -> Result<RawShift, AssembleError> {
    let id = value::integer("shift.shift_id", value::field("shift", item, "shift_id")?)?;
    let what = format!("shift {id}");
    let start = day_index(&format!("{what}.start_day"), value::field(&what, item, "start_day")?, periods)?;
    let duration =
        value::positive_whole(&format!("{what}.duration"), value::field(&what, item, "duration")?, Unit::Days)?;
    if duration > axis.t_max {
        return Err(AssembleError::Coercion {
            field: format!("{what}.duration"),
            value: format!("{duration} days (horizon is {})", axis.t_max),
        });
    }
    Ok(RawShift { source_id: id, start, start_clock: 0, duration, workload_type })
}

fn day_shifts(store: &ExtractionStore, axis: &Axis, periods: &[Period]) -> Result<Vec<RawShift>, AssembleError> {
    if store.entries.contains_key(TASK_WORKLOAD_SHIFTS) {
        let groups = required(store, TASK_WORKLOAD_SHIFTS)?;
        let mut out = Vec::new();
        for group in groups {
            let wt = value::text("workload_type", value::field("workload group", group, "workload_type")?)?.to_string();
            for item in value::array("shifts", value::field("workload group", group, "shifts")?)? {
                out.push(day_shift(item, axis, periods, Some(wt.clone()))?);
            }
        }
        return Ok(out);
    }
    required(store, TASK_SHIFTS)?.iter().map(|item| day_shift(item, axis, periods, None)).collect()
}

/// Hours worked per day by each workload type, and the full-time figure.
type DailyHours = (Vec<(String, f64)>, f64);

/// Workload fractions and the full-time daily hours, when both were extracted.
fn hours_per_day(store: &ExtractionStore) -> Result<Option<DailyHours>, AssembleError> {
    let (Some(types), Some(daily)) = (store.value(TASK_WORKLOAD_TYPES), store.value(TASK_DAILY_HOURS)) else {
        return Ok(None);
    };
    let daily =
        value::number("daily working hours", value::field("daily working hours", daily, "full_time_hours_per_day")?)?;
    let types = value::array("workload types", types)?
        .iter()
        .map(|t| {
            let name = value::text("workload_type", value::field("workload type", t, "workload_type")?)?.to_string();
            let w = value::number("workload", value::field("workload type", t, "workload")?)?;
            Ok((name, w))
        })
        .collect::<Result<Vec<_>, AssembleError>>()?;
    Ok(Some((types, daily)))
}

fn breaks_by_shift(store: &ExtractionStore, raw: &[RawShift]) -> Result<BTreeMap<usize, Vec<Break>>, AssembleError> {
    let mut out: BTreeMap<usize, Vec<Break>> = BTreeMap::new();
    let Some(items) = store.value(TASK_BREAKS) else {
        return Ok(out);
    };
    for item in value::array("breaks", items)? {
        let sid = value::integer("break.shift_id", value::field("break", item, "shift_id")?)?;
        let idx = raw
            .iter()
            .position(|r| r.source_id == sid)
            .ok_or(AssembleError::UnknownShift { shift: sid, context: "break".into() })?;
        let r = &raw[idx];
        let start = value::clock("break.start_time", value::field("break", item, "start_time")?)?;
        let length = value::positive_whole("break.duration", value::field("break", item, "duration")?, Unit::Minutes)?;
        let offset = (start % DAY_MINUTES + DAY_MINUTES - r.start_clock) % DAY_MINUTES;
        if offset + length > r.duration {
            return Err(AssembleError::InvalidBreak {
                shift: sid,
                detail: format!("break at offset {offset} min of length {length} exceeds the {} min shift", r.duration),
            });
        }
        let kind = item.get("break_type").and_then(Value::as_str).map(str::to_string);
        out.entry(idx).or_default().push(Break { offset, length, kind });
    }
    for (idx, list) in out.iter_mut() {
        list.sort_by_key(|b| b.offset);
        if let Some(w) = list.windows(2).find(|w| w[0].offset + w[0].length > w[1].offset) {
            return Err(AssembleError::InvalidBreak {
                shift: raw[*idx].source_id,
                detail: format!("breaks at offsets {} and {} overlap", w[0].offset, w[1].offset),
            });
        }
    }
    Ok(out)
}
