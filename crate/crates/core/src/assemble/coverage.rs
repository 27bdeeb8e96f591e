//! Coverage parameters by interval arithmetic on the cyclic horizon.

use super::sets::{Axis, Period, Shift};

/// Worked sub-intervals of `[start, start + length)` after removing breaks,
/// folded into `[0, t_max)`.
fn worked_pieces(shift: &Shift, length: u32, t_max: u32) -> Vec<(u32, u32)> {
    let length = length.min(t_max);
    let mut pieces = Vec::new();
    let mut cursor = 0;
    for b in &shift.breaks {
        if b.offset >= length {
            break;
        }
        if b.offset > cursor {
            pieces.push((cursor, b.offset));
        }
        cursor = cursor.max(b.offset + b.length);
    }
    if cursor < length {
        pieces.push((cursor, length));
    }
    let mut folded = Vec::new();
    for (a, b) in pieces {
        let (s, e) = (shift.start + a, shift.start + b);
        // A piece of length below t_max crosses the boundary at most once.
        let (s, e) = (s % t_max, s % t_max + (e - s));
        if e <= t_max {
            folded.push((s, e));
        } else {
            folded.push((s, t_max));
            folded.push((0, e - t_max));
        }
    }
    folded
}

fn covers(pieces: &[(u32, u32)], p: &Period) -> bool {
    pieces.iter().any(|&(s, e)| s < p.end && p.start < e)
}

/// `a[t][s] = 1` iff shift `s` works during some part of period `t`.
pub fn coverage_matrix(periods: &[Period], shifts: &[Shift], axis: &Axis) -> Vec<Vec<u8>> {
    let pieces: Vec<_> = shifts.iter().map(|s| worked_pieces(s, s.duration, axis.t_max)).collect();
    periods.iter().map(|p| pieces.iter().map(|ps| covers(ps, p) as u8).collect()).collect()
}

/// `v[t][o][s] = 1` iff shift `s` extended by `o` periods works during
/// period `t`, for `o` in `0..=max_overtime`.
pub fn overtime_coverage(periods: &[Period], shifts: &[Shift], max_overtime: u32, axis: &Axis) -> Vec<Vec<Vec<u8>>> {
    let pieces: Vec<Vec<_>> = (0..=max_overtime)
        .map(|o| {
            shifts
                .iter()
                .map(|s| worked_pieces(s, s.duration.saturating_add(o.saturating_mul(axis.t_size)), axis.t_max))
                .collect()
        })
        .collect();
    periods
        .iter()
        .map(|p| pieces.iter().map(|per_o| per_o.iter().map(|ps| covers(ps, p) as u8).collect()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::sets::{Break, TimeUnit};

    fn axis(t_max: u32, t_size: u32) -> Axis {
        Axis { unit: TimeUnit::Minutes, t_max, t_size, origin: 0 }
    }

    fn periods(ax: &Axis) -> Vec<Period> {
        (0..ax.periods())
            .map(|i| Period { id: i + 1, start: i * ax.t_size, end: (i + 1) * ax.t_size, label: String::new() })
            .collect()
    }

    fn shift(start: u32, duration: u32, breaks: Vec<Break>) -> Shift {
        Shift {
            id: 1,
            source_id: 1,
            start,
            duration,
            breaks,
            workload_type: None,
            hours_per_day: None,
            label: String::new(),
        }
    }

    fn covered(col: &[Vec<u8>], s: usize) -> Vec<u32> {
        col.iter().enumerate().filter(|(_, r)| r[s] == 1).map(|(t, _)| t as u32 + 1).collect()
    }

    #[test]
    fn bus_wrap_and_no_wrap() {
        let ax = axis(1440, 240);
        let ps = periods(&ax);
        let a = coverage_matrix(&ps, &[shift(1200, 480, vec![]), shift(0, 480, vec![])], &ax);
        assert_eq!(covered(&a, 0), vec![1, 6]);
        assert_eq!(covered(&a, 1), vec![1, 2]);
    }

    #[test]
    fn break_removes_its_hour() {
        let ax = axis(1440, 60);
        let ps = periods(&ax);
        let s = shift(540, 480, vec![Break { offset: 180, length: 60, kind: None }]);
        let a = coverage_matrix(&ps, &[s], &ax);
        let hours: Vec<u32> = covered(&a, 0);
        assert_eq!(hours, vec![10, 11, 12, 14, 15, 16, 17]);
    }

    #[test]
    fn overtime_slices() {
        let ax = axis(1440, 240);
        let ps = periods(&ax);
        let shifts = [shift(1200, 480, vec![])];
        let v = overtime_coverage(&ps, &shifts, 4, &ax);
        let a = coverage_matrix(&ps, &shifts, &ax);
        for t in 0..6 {
            assert_eq!(v[t][0], a[t]);
        }
        let with_one: Vec<u32> = (0..6).filter(|&t| v[t][1][0] == 1).map(|t| t as u32 + 1).collect();
        assert_eq!(with_one, vec![1, 2, 6]);
        assert!((0..6).all(|t| v[t][4][0] == 1));
    }

    #[test]
    fn full_horizon_shift_covers_everything() {
        let ax = axis(1440, 240);
        let ps = periods(&ax);
        let a = coverage_matrix(&ps, &[shift(720, 1440, vec![])], &ax);
        assert_eq!(covered(&a, 0).len(), 6);
    }
}
