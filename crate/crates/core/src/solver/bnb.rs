//! Best-bound branch-and-bound over LP relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::assemble::{fmt_num, Sense};

use super::simplex::{self, LpOutcome};
use super::standard::StandardForm;
use super::{AutoBound, SolveResult, SolveStatus, SolverError, SolverOptions, GAP_TOL, INT_TOL};

struct Node {
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: the smallest bound, then the oldest node, wins.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

fn activity_bounds(sf: &StandardForm, row: usize, skip: usize, lower: &[f64], upper: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, 0.0);
    for &(k, a) in &sf.rows[row].coefs {
        if k == skip || a == 0.0 {
            continue;
        }
        let (p, q) = (a * lower[k], a * upper[k]);
        // Minima are never +inf and maxima never -inf, so both sums are defined.
        lo += p.min(q);
        hi += p.max(q);
    }
    (lo, hi)
}

/// Finite upper bounds for unbounded integer columns.
///
/// Two rules, iterated to a fixpoint. A row bound holds for every feasible
/// point. A dominance bound holds for some optimal point: when lowering
/// `x_j` never hurts any row but the covering rows it helps, and costs
/// nothing, `x_j` can stop at the value that alone satisfies those rows.
pub(crate) fn auto_bounds(sf: &StandardForm, cost: &[f64], lower: &[f64], upper: &mut [f64]) -> Vec<AutoBound> {
    let n = sf.num_vars();
    let mut column_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, r) in sf.rows.iter().enumerate() {
        for &(j, a) in &r.coefs {
            if a != 0.0 {
                column_rows[j].push((i, a));
            }
        }
    }
    let mut found: Vec<Option<AutoBound>> = vec![None; n];
    for _pass in 0..n + 1 {
        let mut changed = false;
        for j in 0..n {
            if !sf.integer[j] || upper[j].is_finite() {
                continue;
            }
            let mut best: Option<(f64, String)> = None;
            let mut consider = |u: f64, rule: String| {
                if best.as_ref().is_none_or(|(b, _)| u < *b) {
                    best = Some((u, rule));
                }
            };
            // Bounds implied by single rows.
            for &(i, a) in &column_rows[j] {
                let r = &sf.rows[i];
                let (lo, hi) = activity_bounds(sf, i, j, lower, upper);
                let caps_above = matches!(r.sense, Sense::Le | Sense::Eq) && a > 0.0;
                let caps_below = matches!(r.sense, Sense::Ge | Sense::Eq) && a < 0.0;
                let u = if caps_above {
                    (r.rhs - lo) / a
                } else if caps_below {
                    (r.rhs - hi) / a
                } else {
                    continue;
                };
                if u.is_finite() {
                    consider((u + INT_TOL).floor().max(lower[j]), format!("implied by row {}", r.name));
                }
            }
            // Dominance: only covering rows resist lowering x_j.
            if cost[j] >= 0.0 && lower[j].is_finite() {
                let mut need = lower[j];
                let mut ok = true;
                for &(i, a) in &column_rows[j] {
                    let r = &sf.rows[i];
                    match (r.sense, a > 0.0) {
                        (Sense::Le, true) | (Sense::Ge, false) => {}
                        (Sense::Ge, true) => {
                            let (lo, _) = activity_bounds(sf, i, j, lower, upper);
                            if !lo.is_finite() {
                                ok = false;
                                break;
                            }
                            need = need.max(((r.rhs - lo) / a - INT_TOL).ceil());
                        }
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    consider(need, "dominance over covering rows".into());
                }
            }
            if let Some((u, rule)) = best {
                upper[j] = u;
                found[j] = Some(AutoBound { var: sf.names[j].clone(), upper: u, rule });
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    found.into_iter().flatten().collect()
}

fn most_fractional(sf: &StandardForm, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        if !sf.integer[j] {
            continue;
        }
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist > INT_TOL && best.is_none_or(|(_, d)| dist > d + 1e-12) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

pub(crate) fn solve(sf: &StandardForm, opts: &SolverOptions) -> Result<SolveResult, SolverError> {
    let sign = super::sign(sf);
    let cost: Vec<f64> = sf.objective.iter().map(|c| sign * c).collect();
    let lower = sf.lower.clone();
    let mut upper = sf.upper.clone();
    let auto = auto_bounds(sf, &cost, &lower, &mut upper);
    for b in &auto {
        log::debug!("auto bound {} <= {} ({})", b.var, fmt_num(b.upper), b.rule);
    }

    let mut iterations = 0;
    let mut nodes = 1;
    let (root, its) = simplex::solve(sf, &cost, &lower, &upper)?;
    iterations += its;
    let mut result = SolveResult::empty(auto);
    let (x, bound) = match root {
        LpOutcome::Infeasible => return Ok(result.with(SolveStatus::Infeasible, nodes, iterations)),
        LpOutcome::Unbounded => return Ok(result.with(SolveStatus::Unbounded, nodes, iterations)),
        LpOutcome::Optimal { x, objective } => (x, objective),
    };

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    let mut offer = |x: Vec<f64>,
                     bound: f64,
                     lower: Vec<f64>,
                     upper: Vec<f64>,
                     heap: &mut BinaryHeap<Node>,
                     incumbent: &mut Option<(f64, Vec<f64>)>| {
        if incumbent.as_ref().is_some_and(|(best, _)| bound >= *best - GAP_TOL) {
            return;
        }
        if most_fractional(sf, &x).is_none() {
            let rounded: Vec<f64> =
                x.iter().enumerate().map(|(j, &v)| if sf.integer[j] { v.round() } else { v }).collect();
            let value = cost.iter().zip(&rounded).map(|(c, v)| c * v).sum();
            *incumbent = Some((value, rounded));
        } else {
            heap.push(Node { bound, id: next_id, lower, upper, x });
            next_id += 1;
        }
    };
    offer(x, bound, lower, upper, &mut heap, &mut incumbent);

    while let Some(node) = heap.pop() {
        if incumbent.as_ref().is_some_and(|(best, _)| node.bound >= *best - GAP_TOL) {
            heap.clear();
            break;
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            break;
        }
        let j = most_fractional(sf, &node.x).expect("queued nodes are fractional");
        let v = node.x[j];
        let children = [
            (node.lower.clone(), {
                let mut u = node.upper.clone();
                u[j] = v.floor();
                u
            }),
            (
                {
                    let mut l = node.lower.clone();
                    l[j] = v.ceil();
                    l
                },
                node.upper.clone(),
            ),
        ];
        for (lo, up) in children {
            if lo[j] > up[j] {
                continue;
            }
            nodes += 1;
            let (out, its) = simplex::solve(sf, &cost, &lo, &up)?;
            iterations += its;
            match out {
                LpOutcome::Optimal { x, objective } => offer(x, objective, lo, up, &mut heap, &mut incumbent),
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => {
                    return Err(SolverError::Numerical {
                        message: "a branch reported an unbounded relaxation under a bounded root".into(),
                        log: vec![],
                    })
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let status = if heap.is_empty() {
        if incumbent.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        }
    } else {
        SolveStatus::NodeLimit
    };
    result = result.with(status, nodes, iterations);
    if let Some((value, x)) = incumbent {
        let bound = if status == SolveStatus::Optimal { value } else { open_bound.min(value) };
        result.objective = Some(sign * value);
        result.best_bound = Some(sign * bound);
        result.assignment = sf.names.iter().cloned().zip(x).collect();
    } else if status == SolveStatus::NodeLimit {
        result.best_bound = Some(sign * open_bound);
    }
    Ok(result)
}
