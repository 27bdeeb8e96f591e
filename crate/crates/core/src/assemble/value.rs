//! Strict coercion of extracted JSON scalars.
//!
//! Extracted numbers often arrive as strings (`"1440"`, `"7 days"`). Every
//! conversion here either yields an exact value or an error; nothing
//! silently becomes zero.

use serde_json::Value;

use super::AssembleError;

/// Unit in which a quantity is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Minutes,
    Days,
}

fn bad(what: &str, v: &Value) -> AssembleError {
    AssembleError::Coercion { field: what.to_string(), value: v.to_string() }
}

/// Number, or a string holding exactly one number.
pub fn number(what: &str, v: &Value) -> Result<f64, AssembleError> {
    match v {
        Value::Number(n) => n.as_f64().filter(|x| x.is_finite()).ok_or_else(|| bad(what, v)),
        Value::String(s) => {
            let t = s.trim().trim_start_matches('$').replace(',', "");
            t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(what, v))
        }
        _ => Err(bad(what, v)),
    }
}

pub fn integer(what: &str, v: &Value) -> Result<i64, AssembleError> {
    let x = number(what, v)?;
    if x.fract() != 0.0 || x.abs() > 1e15 {
        return Err(bad(what, v));
    }
    Ok(x as i64)
}

pub fn non_negative_integer(what: &str, v: &Value) -> Result<u32, AssembleError> {
    let x = integer(what, v)?;
    u32::try_from(x).map_err(|_| bad(what, v))
}

/// A number with an optional unit word, converted to `unit`.
///
/// Minutes accept `min`/`minutes` and `h`/`hours`; days accept `day(s)` and
/// `week(s)`. A bare number is taken to be in `unit` already.
pub fn quantity(what: &str, v: &Value, unit: Unit) -> Result<f64, AssembleError> {
    if let Ok(x) = number(what, v) {
        return Ok(x);
    }
    let Value::String(s) = v else {
        return Err(bad(what, v));
    };
    let s = s.trim().to_ascii_lowercase();
    let split = s.find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-')).ok_or_else(|| bad(what, v))?;
    let (num, word) = s.split_at(split);
    let x: f64 = num.trim().parse().map_err(|_| bad(what, v))?;
    let word = word.trim();
    let factor = match (unit, word) {
        (Unit::Minutes, "min" | "mins" | "minute" | "minutes") => 1.0,
        (Unit::Minutes, "h" | "hr" | "hrs" | "hour" | "hours") => 60.0,
        (Unit::Days, "day" | "days") => 1.0,
        (Unit::Days, "week" | "weeks") => 7.0,
        _ => return Err(bad(what, v)),
    };
    Ok(x * factor)
}

/// Quantity in `unit` that must be a positive whole number.
pub fn positive_whole(what: &str, v: &Value, unit: Unit) -> Result<u32, AssembleError> {
    let x = quantity(what, v, unit)?;
    if x <= 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
        return Err(bad(what, v));
    }
    Ok(x as u32)
}

/// `HH:MM` (24-hour) to minutes since midnight. `24:00` is accepted as 1440.
pub fn clock(what: &str, v: &Value) -> Result<u32, AssembleError> {
    let s = v.as_str().ok_or_else(|| bad(what, v))?.trim();
    let (h, m) = s.split_once(':').ok_or_else(|| bad(what, v))?;
    let h: u32 = h.trim().parse().map_err(|_| bad(what, v))?;
    let m: u32 = m.trim().parse().map_err(|_| bad(what, v))?;
    if m >= 60 || h > 24 || (h == 24 && m != 0) {
        return Err(bad(what, v));
    }
    Ok(h * 60 + m)
}

pub fn text<'a>(what: &str, v: &'a Value) -> Result<&'a str, AssembleError> {
    v.as_str().map(str::trim).ok_or_else(|| bad(what, v))
}

pub fn field<'a>(what: &str, obj: &'a Value, key: &str) -> Result<&'a Value, AssembleError> {
    match obj.get(key) {
        Some(Value::Null) | None => Err(AssembleError::MissingField { field: format!("{what}.{key}") }),
        Some(v) => Ok(v),
    }
}

pub fn array<'a>(what: &str, v: &'a Value) -> Result<&'a Vec<Value>, AssembleError> {
    v.as_array().ok_or_else(|| bad(what, v))
}
