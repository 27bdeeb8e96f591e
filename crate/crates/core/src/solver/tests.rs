use super::*;
use crate::assemble::Sense;

fn sf(sense: ObjectiveSense, objective: Vec<f64>, rows: Vec<(Vec<f64>, Sense, f64)>) -> StandardForm {
    let n = objective.len();
    StandardForm {
        sense,
        objective,
        rows: rows
            .into_iter()
            .enumerate()
            .map(|(i, (a, s, b))| SfRow {
                name: format!("r{i}"),
                coefs: a.into_iter().enumerate().filter(|(_, c)| *c != 0.0).collect(),
                sense: s,
                rhs: b,
            })
            .collect(),
        lower: vec![0.0; n],
        upper: vec![f64::INFINITY; n],
        integer: vec![false; n],
        names: (0..n).map(|j| format!("x{j}")).collect(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

#[test]
fn single_variable_bounds() {
    let p = sf(ObjectiveSense::Minimize, vec![1.0], vec![(vec![1.0], Sense::Ge, 3.0), (vec![1.0], Sense::Le, 10.0)]);
    let r = solve_lp(&p).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!(close(r.objective.unwrap(), 3.0));
}

#[test]
fn contradictory_rows_are_infeasible() {
    let p = sf(ObjectiveSense::Minimize, vec![1.0], vec![(vec![1.0], Sense::Ge, 2.0), (vec![1.0], Sense::Le, 1.0)]);
    assert_eq!(solve_lp(&p).unwrap().status, SolveStatus::Infeasible);
    assert_eq!(solve_milp(&p).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn unbounded_direction() {
    let p = sf(ObjectiveSense::Maximize, vec![1.0, 1.0], vec![(vec![1.0, -1.0], Sense::Le, 1.0)]);
    assert_eq!(solve_lp(&p).unwrap().status, SolveStatus::Unbounded);
}

#[test]
fn maximisation_and_equality() {
    // max 3x + 2y s.t. x + y = 4, x <= 3 -> x = 3, y = 1, objective 11.
    let p = sf(
        ObjectiveSense::Maximize,
        vec![3.0, 2.0],
        vec![(vec![1.0, 1.0], Sense::Eq, 4.0), (vec![1.0, 0.0], Sense::Le, 3.0)],
    );
    let r = solve_lp(&p).unwrap();
    assert!(close(r.objective.unwrap(), 11.0));
    assert_eq!(r.values().iter().map(|v| v.round()).collect::<Vec<_>>(), vec![3.0, 1.0]);
}

#[test]
fn bounded_columns_flip() {
    let mut p = sf(ObjectiveSense::Maximize, vec![1.0, 1.0], vec![(vec![1.0, 2.0], Sense::Le, 10.0)]);
    p.upper = vec![2.0, 3.0];
    let r = solve_lp(&p).unwrap();
    assert!(close(r.objective.unwrap(), 5.0));
}

#[test]
fn free_and_negative_columns() {
    // min x - 2y with x free, y <= -2, x - y >= 1 -> y = -2, x = -1, objective 3.
    let mut p = sf(ObjectiveSense::Minimize, vec![1.0, -2.0], vec![(vec![1.0, -1.0], Sense::Ge, 1.0)]);
    p.lower = vec![f64::NEG_INFINITY, f64::NEG_INFINITY];
    p.upper = vec![f64::INFINITY, -2.0];
    let r = solve_lp(&p).unwrap();
    assert!(close(r.objective.unwrap(), 3.0), "{r:?}");
    assert!(close(r.values()[0], -1.0));
    p.objective = vec![1.0, 1.0];
    assert_eq!(solve_lp(&p).unwrap().status, SolveStatus::Unbounded);
}

#[test]
fn beale_cycling_example_terminates() {
    // Cycles under textbook Dantzig pricing without an anti-cycling rule.
    let p = sf(
        ObjectiveSense::Minimize,
        vec![-0.75, 150.0, -0.02, 6.0],
        vec![
            (vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0),
            (vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0),
            (vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0),
        ],
    );
    let r = solve_lp(&p).unwrap();
    assert!(close(r.objective.unwrap(), -0.05), "{r:?}");
}

#[test]
fn small_knapsack_milp() {
    // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8, integers.
    let mut p = sf(
        ObjectiveSense::Maximize,
        vec![5.0, 4.0, 3.0],
        vec![
            (vec![2.0, 3.0, 1.0], Sense::Le, 5.0),
            (vec![4.0, 1.0, 2.0], Sense::Le, 11.0),
            (vec![3.0, 4.0, 2.0], Sense::Le, 8.0),
        ],
    );
    p.integer = vec![true; 3];
    let r = solve_milp(&p).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!(close(r.objective.unwrap(), 13.0));
    assert!(p.max_violation(&r.values()) <= 1e-9);
}

#[test]
fn fractional_relaxation_needs_branching() {
    // min x + y s.t. 2x + 2y >= 3 -> LP 1.5, MILP 2.
    let mut p = sf(ObjectiveSense::Minimize, vec![1.0, 1.0], vec![(vec![2.0, 2.0], Sense::Ge, 3.0)]);
    assert!(close(solve_lp(&p).unwrap().objective.unwrap(), 1.5));
    p.integer = vec![true; 2];
    let r = solve_milp(&p).unwrap();
    assert!(close(r.objective.unwrap(), 2.0));
    assert_eq!(r.best_bound, r.objective);
    assert!(r.nodes_explored > 1);
    assert!(!r.auto_bounds.is_empty());
}

#[test]
fn zero_demand_gives_zero() {
    let mut p = sf(
        ObjectiveSense::Minimize,
        vec![1.0, 1.0],
        vec![(vec![1.0, 1.0], Sense::Ge, 0.0), (vec![1.0, 0.0], Sense::Ge, 0.0)],
    );
    p.integer = vec![true; 2];
    let r = solve_milp(&p).unwrap();
    assert_eq!(r.objective, Some(0.0));
    assert!(r.values().iter().all(|&v| v == 0.0));
}

#[test]
fn node_limit_keeps_incumbent_and_bound() {
    // Odd-sum parity: 2 x0 + 2 x1 + ... = 2k+1 has no integer point, so B&B must enumerate.
    let n = 6;
    let mut p = sf(ObjectiveSense::Minimize, vec![1.0; n], vec![(vec![2.0; n], Sense::Eq, 7.0)]);
    p.integer = vec![true; n];
    p.upper = vec![5.0; n];
    let r = solve_milp_with(&p, &SolverOptions { node_limit: 3 }).unwrap();
    assert_eq!(r.status, SolveStatus::NodeLimit);
    assert!(r.objective.is_none());
    assert!(r.best_bound.is_some());
    assert_eq!(solve_milp(&p).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn dominance_bound_only_on_pure_covering_columns() {
    let mut p = sf(
        ObjectiveSense::Minimize,
        vec![1.0, 1.0, 0.0],
        vec![(vec![2.0, 1.0, 0.0], Sense::Ge, 7.0), (vec![1.0, 0.0, -1.0], Sense::Eq, 0.0)],
    );
    p.integer = vec![true; 3];
    let cost = p.objective.clone();
    let mut upper = p.upper.clone();
    let bounds = bnb::auto_bounds(&p, &cost, &p.lower, &mut upper);
    // x1 only covers: bounded by 7. x0 sits in an equality, x2 follows it.
    assert_eq!(upper[1], 7.0);
    assert!(upper[0].is_infinite() && upper[2].is_infinite());
    assert_eq!(bounds.len(), 1);
    let r = solve_milp(&p).unwrap();
    assert!(close(r.objective.unwrap(), 4.0));
}
