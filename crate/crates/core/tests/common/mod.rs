//! Independent oracles and generators shared by the integration tests and
//! the acceptance harness. Nothing here calls the solver or the assembler.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roster_milp::assemble::{Axis, Break, Period, Sense, Shift, TimeUnit};
use roster_milp::registry::ExtractionTask;
use roster_milp::solver::{SfRow, StandardForm};

pub const SCRIPT_MODEL: &str = "reference-script";

pub fn datasets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../datasets")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * b.abs().max(1.0)
}

// ---------------------------------------------------------------------------
// Integer programs

/// `min c·x` over integers `0 <= x <= upper` subject to `rows`.
#[derive(Debug, Clone)]
pub struct IntProgram {
    pub cost: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
    pub upper: Vec<i64>,
}

fn satisfied(act: f64, sense: Sense, rhs: f64) -> bool {
    match sense {
        Sense::Le => act <= rhs + 1e-9,
        Sense::Ge => act >= rhs - 1e-9,
        Sense::Eq => (act - rhs).abs() <= 1e-9,
    }
}

/// Depth-first search over column values, pruned by the continuous
/// relaxation and a dominance memo on `(depth, row activities)`. Returns the optimum, or `None` if
/// infeasible.
pub fn dfs_optimum(p: &IntProgram) -> Option<f64> {
    let order = closing_order(p);
    let p = &IntProgram {
        cost: order.iter().map(|&j| p.cost[j]).collect(),
        rows: p.rows.iter().map(|(a, s, r)| (order.iter().map(|&j| a[j]).collect(), *s, *r)).collect(),
        upper: order.iter().map(|&j| p.upper[j]).collect(),
    };
    let n = p.cost.len();
    let m = p.rows.len();
    // Suffix ranges of each row's remaining activity.
    let mut lo = vec![vec![0.0; n + 1]; m];
    let mut hi = vec![vec![0.0; n + 1]; m];
    for (i, (a, _, _)) in p.rows.iter().enumerate() {
        for j in (0..n).rev() {
            let top = a[j] * p.upper[j] as f64;
            lo[i][j] = lo[i][j + 1] + top.min(0.0);
            hi[i][j] = hi[i][j + 1] + top.max(0.0);
        }
    }
    // A column that only helps covering rows and only hurts the others never
    // needs more than the largest remaining shortfall it can fill.
    let covering = (0..n)
        .map(|j| {
            p.cost[j] >= 0.0
                && p.rows.iter().all(|(a, s, _)| match s {
                    Sense::Ge | Sense::Le => a[j] >= 0.0,
                    Sense::Eq => a[j] == 0.0,
                })
        })
        .collect();
    // With integral costs every objective value is a multiple of their gcd.
    let grid = if p.cost.iter().all(|c| c.fract() == 0.0) {
        p.cost.iter().fold(0i64, |g, &c| gcd(g, c.abs() as i64)) as f64
    } else {
        0.0
    };
    let mut s = Dfs { p, lo, hi, covering, grid, best: f64::INFINITY, memo: HashMap::new(), act: vec![0.0; m] };
    s.go(0, 0.0);
    s.best.is_finite().then_some(s.best)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Orders columns so that rows run out of undecided columns early: the next
/// column is taken from the row with the fewest undecided columns left.
fn closing_order(p: &IntProgram) -> Vec<usize> {
    let n = p.cost.len();
    let mut left: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    while !left.is_empty() {
        let row = p
            .rows
            .iter()
            .map(|(a, _, _)| left.iter().filter(|&&j| a[j] != 0.0).count())
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .min_by_key(|&(i, c)| (c, i))
            .map(|(i, _)| i);
        let pos = match row {
            Some(i) => left.iter().position(|&j| p.rows[i].0[j] != 0.0).unwrap(),
            None => 0,
        };
        order.push(left.remove(pos));
    }
    order
}

struct Dfs<'a> {
    p: &'a IntProgram,
    lo: Vec<Vec<f64>>,
    hi: Vec<Vec<f64>>,
    covering: Vec<bool>,
    grid: f64,
    best: f64,
    memo: HashMap<(usize, Vec<i64>), f64>,
    act: Vec<f64>,
}

impl Dfs<'_> {
    /// Continuous relaxation of the remaining columns against the residual rows.
    fn bound(&self, j: usize) -> Option<f64> {
        let p = self.p;
        let rows: Vec<(Vec<f64>, Sense, f64)> =
            p.rows.iter().zip(&self.act).map(|((a, s, r), act)| (a[j..].to_vec(), *s, r - act)).collect();
        let upper: Vec<f64> = p.upper[j..].iter().map(|&u| u as f64).collect();
        tableau_lp(&p.cost[j..], &rows, &upper)
    }

    fn go(&mut self, j: usize, cost: f64) {
        let p = self.p;
        for (i, (_, sense, rhs)) in p.rows.iter().enumerate() {
            let (a, b) = (self.act[i] + self.lo[i][j], self.act[i] + self.hi[i][j]);
            let possible = match sense {
                Sense::Le => a <= rhs + 1e-9,
                Sense::Ge => b >= rhs - 1e-9,
                Sense::Eq => a <= rhs + 1e-9 && b >= rhs - 1e-9,
            };
            if !possible {
                return;
            }
        }
        if j == p.cost.len() {
            if p.rows.iter().zip(&self.act).all(|((_, s, r), &a)| satisfied(a, *s, *r)) && cost < self.best {
                self.best = cost;
            }
            return;
        }
        let Some(relaxed) = self.bound(j) else {
            return;
        };
        let mut lb = cost + relaxed;
        if self.grid > 0.0 {
            lb = (lb / self.grid - 1e-9).ceil() * self.grid;
        }
        if lb >= self.best - 1e-9 {
            return;
        }
        // Surplus on a covering row that can only grow is worth nothing later.
        let key = (
            j,
            p.rows
                .iter()
                .zip(&self.act)
                .map(|((row, s, r), a)| {
                    let saturated = *s == Sense::Ge && row[j..].iter().all(|&c| c >= 0.0);
                    let a = if saturated { a.min(*r) } else { *a };
                    (a * 1e6).round() as i64
                })
                .collect::<Vec<_>>(),
        );
        match self.memo.get(&key) {
            Some(&seen) if seen <= cost + 1e-9 => return,
            _ => {
                self.memo.insert(key, cost);
            }
        }
        let mut top = p.upper[j];
        if self.covering[j] {
            // Later columns may still take away up to `lo` from each row.
            let useful = p
                .rows
                .iter()
                .enumerate()
                .filter(|(_, (a, s, _))| *s == Sense::Ge && a[j] > 0.0)
                .map(|(i, (a, _, r))| ((r - self.act[i] - self.lo[i][j + 1]).max(0.0) / a[j] - 1e-9).ceil() as i64)
                .max()
                .unwrap_or(0);
            top = top.min(useful);
        }
        for v in 0..=top {
            for (i, (a, _, _)) in p.rows.iter().enumerate() {
                self.act[i] += a[j] * v as f64;
            }
            self.go(j + 1, cost + p.cost[j] * v as f64);
            for (i, (a, _, _)) in p.rows.iter().enumerate() {
                self.act[i] -= a[j] * v as f64;
            }
        }
    }
}

/// Bus drivers: six 4-hour periods, 8-hour shifts at every period start.
pub fn bus_program() -> IntProgram {
    let demand = [4.0, 8.0, 10.0, 7.0, 12.0, 4.0];
    let rows = (0..6)
        .map(|t| {
            // A shift starting in period s works periods s and s+1 (cyclic).
            let a = (0..6).map(|s| if (t + 6 - s) % 6 < 2 { 1.0 } else { 0.0 }).collect();
            (a, Sense::Ge, demand[t])
        })
        .collect();
    // No optimal solution puts more drivers on a shift than the largest demand.
    IntProgram { cost: vec![1.0; 6], rows, upper: vec![12; 6] }
}

/// Post office: 5 consecutive days for both types, 8 h (full time) or 4 h
/// (part time) a day, part-time headcount at most 25.
pub fn post_office_program() -> IntProgram {
    let hours = [136.0, 104.0, 120.0, 152.0, 112.0, 128.0, 88.0];
    let works = |start: usize, day: usize| (day + 7 - start) % 7 < 5;
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = (0..7)
        .map(|d| {
            let a = (0..14)
                .map(|j| match (j < 7, works(j % 7, d)) {
                    (true, true) => 8.0,
                    (false, true) => 4.0,
                    _ => 0.0,
                })
                .collect();
            (a, Sense::Ge, hours[d])
        })
        .collect();
    rows.push(((0..14).map(|j| if j < 7 { 0.0 } else { 1.0 }).collect(), Sense::Le, 25.0));
    let cost = (0..14).map(|j| if j < 7 { 600.0 } else { 200.0 }).collect();
    // Full-timers on one pattern never exceed ceil(152 / 8) = 19.
    let upper = (0..14).map(|j| if j < 7 { 19 } else { 25 }).collect();
    IntProgram { cost, rows, upper }
}

/// Every integer point of the box, for tiny programs.
pub fn enumerate_optimum(p: &IntProgram) -> Option<f64> {
    let n = p.cost.len();
    let mut x = vec![0i64; n];
    let mut best: Option<f64> = None;
    loop {
        let ok = p.rows.iter().all(|(a, s, r)| {
            let act: f64 = a.iter().zip(&x).map(|(c, v)| c * *v as f64).sum();
            satisfied(act, *s, *r)
        });
        if ok {
            let obj: f64 = p.cost.iter().zip(&x).map(|(c, v)| c * *v as f64).sum();
            if best.is_none_or(|b| obj < b) {
                best = Some(obj);
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            if x[k] < p.upper[k] {
                x[k] += 1;
                break;
            }
            x[k] = 0;
            k += 1;
        }
    }
}

pub fn to_standard(p: &IntProgram, integer: bool) -> StandardForm {
    let n = p.cost.len();
    StandardForm {
        sense: roster_milp::assemble::ObjectiveSense::Minimize,
        objective: p.cost.clone(),
        rows: p
            .rows
            .iter()
            .enumerate()
            .map(|(i, (a, s, r))| SfRow {
                name: format!("r{i}"),
                coefs: a.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect(),
                sense: *s,
                rhs: *r,
            })
            .collect(),
        lower: vec![0.0; n],
        upper: p.upper.iter().map(|&u| u as f64).collect(),
        integer: vec![integer; n],
        names: (0..n).map(|j| format!("x{j}")).collect(),
    }
}

fn pick_sense(r: &mut ChaCha8Rng) -> Sense {
    match r.random_range(0..10) {
        0 => Sense::Eq,
        1..=5 => Sense::Le,
        _ => Sense::Ge,
    }
}

/// Up to 5 variables in `[0, 6]`, up to 6 rows, integer coefficients in `[-5, 5]`.
pub fn random_int_program(r: &mut ChaCha8Rng) -> IntProgram {
    let n = r.random_range(1..=5);
    let m = r.random_range(1..=6);
    IntProgram {
        cost: (0..n).map(|_| r.random_range(-5..=5) as f64).collect(),
        rows: (0..m)
            .map(|_| {
                let a = (0..n).map(|_| r.random_range(-5..=5) as f64).collect();
                (a, pick_sense(r), r.random_range(-10..=20) as f64)
            })
            .collect(),
        upper: (0..n).map(|_| r.random_range(0..=6)).collect(),
    }
}

/// `min c·x` subject to `rows` and `0 <= x <= upper` by a dense two-phase
/// tableau simplex with Bland's rule. `None` when infeasible; unbounded
/// cannot happen with a finite box.
pub fn tableau_lp(cost: &[f64], rows: &[(Vec<f64>, Sense, f64)], upper: &[f64]) -> Option<f64> {
    let n = cost.len();
    let mut cons: Vec<(Vec<f64>, Sense, f64)> = rows.to_vec();
    for (k, &u) in upper.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        cons.push((e, Sense::Le, u));
    }
    for (a, s, r) in cons.iter_mut() {
        if *r < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            *r = -*r;
            *s = match s {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let m = cons.len();
    let slacks = cons.iter().filter(|c| c.1 != Sense::Eq).count();
    let arts = cons.iter().filter(|c| c.1 != Sense::Le).count();
    let width = n + slacks + arts;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (n, n + slacks);
    for (i, (a, s, r)) in cons.iter().enumerate() {
        t[i][..n].copy_from_slice(a);
        t[i][width] = *r;
        match s {
            Sense::Le => {
                t[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                t[i][next_slack] = -1.0;
                next_slack += 1;
                t[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                t[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let first_art = n + slacks;
    let phase1: Vec<f64> = (0..width).map(|j| if j >= first_art { 1.0 } else { 0.0 }).collect();
    let infeasibility = bland(&mut t, &mut basis, &phase1, width)?;
    if infeasibility > 1e-7 {
        return None;
    }
    // Artificials still basic at zero must leave before phase 2, or a later
    // pivot could drive them positive. Rows with no real pivot are redundant.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= first_art {
            match (0..first_art).find(|&j| t[i][j].abs() > 1e-9) {
                Some(j) => {
                    pivot(&mut t, i, j);
                    basis[i] = j;
                }
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let phase2: Vec<f64> = (0..width).map(|j| if j < n { cost[j] } else { 0.0 }).collect();
    bland(&mut t, &mut basis, &phase2, first_art)
}

/// Minimises `cost` over the tableau; only columns below `allowed` may enter.
fn bland(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> Option<f64> {
    let m = t.len();
    let rhs = cost.len();
    loop {
        let reduced = |j: usize| cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
        let Some(enter) = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j) < -1e-9) else {
            return Some((0..m).map(|i| cost[basis[i]] * t[i][rhs]).sum());
        };
        let leave = (0..m).filter(|&i| t[i][enter] > 1e-9).min_by(|&a, &b| {
            let (ra, rb) = (t[a][rhs] / t[a][enter], t[b][rhs] / t[b][enter]);
            ra.total_cmp(&rb).then(basis[a].cmp(&basis[b]))
        })?;
        pivot(t, leave, enter);
        basis[leave] = enter;
    }
}

fn pivot(t: &mut [Vec<f64>], leave: usize, enter: usize) {
    let piv = t[leave][enter];
    t[leave].iter_mut().for_each(|v| *v /= piv);
    let pivot_row = t[leave].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != leave && row[enter] != 0.0 {
            let f = row[enter];
            row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
        }
    }
}

// ---------------------------------------------------------------------------
// Linear programs by vertex enumeration

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                let pivot_row = a[col].clone();
                a[i].iter_mut().zip(&pivot_row).skip(col).for_each(|(v, p)| *v -= f * p);
                b[i] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Optimum of the continuous relaxation of a boxed program: the best
/// feasible basic solution over every choice of `n` tight constraints.
pub fn vertex_optimum(p: &IntProgram) -> Option<f64> {
    let n = p.cost.len();
    let mut tight: Vec<(Vec<f64>, f64)> = p.rows.iter().map(|(a, _, r)| (a.clone(), *r)).collect();
    for j in 0..n {
        let e: Vec<f64> = (0..n).map(|k| if k == j { 1.0 } else { 0.0 }).collect();
        tight.push((e.clone(), 0.0));
        tight.push((e, p.upper[j] as f64));
    }
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let a = pick.iter().map(|&i| tight[i].0.clone()).collect();
        let b = pick.iter().map(|&i| tight[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            let in_box = x.iter().zip(&p.upper).all(|(v, &u)| *v >= -1e-7 && *v <= u as f64 + 1e-7);
            let rows_ok = p.rows.iter().all(|(a, s, r)| {
                let act: f64 = a.iter().zip(&x).map(|(c, v)| c * v).sum();
                match s {
                    Sense::Le => act <= r + 1e-7,
                    Sense::Ge => act >= r - 1e-7,
                    Sense::Eq => (act - r).abs() <= 1e-7,
                }
            });
            if in_box && rows_ok {
                let obj: f64 = p.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.is_none_or(|b| obj < b) {
                    best = Some(obj);
                }
            }
        }
        // Next n-combination of the tight-set indices.
        let total = tight.len();
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if pick[k] < total - n + k {
                pick[k] += 1;
                for i in k + 1..n {
                    pick[i] = pick[i - 1] + 1;
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Coverage by minute-level simulation

pub struct CoverageCase {
    pub axis: Axis,
    pub periods: Vec<Period>,
    pub shifts: Vec<Shift>,
}

pub fn random_coverage_case(r: &mut ChaCha8Rng) -> CoverageCase {
    let t_size = [15, 30, 60, 120, 180, 240, 480][r.random_range(0..7)];
    let axis = Axis { unit: TimeUnit::Minutes, t_max: 1440, t_size, origin: 0 };
    let periods = (0..axis.periods())
        .map(|i| Period { id: i + 1, start: i * t_size, end: (i + 1) * t_size, label: String::new() })
        .collect();
    let count = r.random_range(1..=6);
    let shifts = (0..count)
        .map(|k| {
            let grid = r.random_bool(0.7);
            let start = if grid { r.random_range(0..axis.periods()) * t_size } else { r.random_range(0..1440) };
            let duration = if grid { r.random_range(1..=axis.periods()) * t_size } else { r.random_range(1..=1440) };
            let mut breaks = Vec::new();
            let mut cursor = 0;
            while r.random_bool(0.4) && cursor + 2 < duration {
                let offset = r.random_range(cursor + 1..duration);
                let length = r.random_range(1..=(duration - offset).min(240));
                breaks.push(Break { offset, length, kind: None });
                cursor = offset + length;
            }
            Shift {
                id: k + 1,
                source_id: k as i64 + 1,
                start,
                duration,
                breaks,
                workload_type: None,
                hours_per_day: None,
                label: String::new(),
            }
        })
        .collect();
    CoverageCase { axis, periods, shifts }
}

/// Minutes of the day worked by `s` when it lasts `length` minutes.
pub fn worked_minutes(s: &Shift, length: u32, t_max: u32) -> Vec<bool> {
    let mut on = vec![false; t_max as usize];
    for off in 0..length.min(t_max) {
        if s.breaks.iter().any(|b| off >= b.offset && off < b.offset + b.length) {
            continue;
        }
        on[((s.start + off) % t_max) as usize] = true;
    }
    on
}

pub fn minute_coverage(case: &CoverageCase, extra: u32) -> Vec<Vec<u8>> {
    let minutes: Vec<Vec<bool>> =
        case.shifts.iter().map(|s| worked_minutes(s, s.duration + extra * case.axis.t_size, case.axis.t_max)).collect();
    case.periods
        .iter()
        .map(|p| minutes.iter().map(|on| (p.start..p.end).any(|m| on[m as usize]) as u8).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Registries

pub struct RandomRegistry {
    pub tasks: Vec<ExtractionTask>,
    pub nodes: BTreeSet<String>,
    pub activated: BTreeSet<String>,
}

/// Up to 30 tasks. Prerequisites point to lower ranks and parents to higher
/// ranks, which keeps the registry acyclic even after alias resolution.
pub fn random_registry(r: &mut ChaCha8Rng) -> RandomRegistry {
    let n = r.random_range(1..=30);
    let node_count = r.random_range(1..=40);
    let nodes: Vec<String> = (0..node_count).map(|i| format!("node {i}")).collect();
    let mut tasks = Vec::with_capacity(n);
    for i in 0..n {
        let mut prerequisites: Vec<String> =
            (0..i).filter(|_| r.random_bool(0.12)).map(|j| format!("task {j}")).collect();
        prerequisites.dedup();
        let parent_task =
            if i + 1 < n && r.random_bool(0.2) { Some(format!("task {}", r.random_range(i + 1..n))) } else { None };
        let associated_nodes: BTreeSet<String> =
            (0..r.random_range(0..=3)).map(|_| nodes[r.random_range(0..node_count)].clone()).collect();
        tasks.push(ExtractionTask {
            name: format!("task {i}"),
            description: format!("extract part {i}"),
            output_schema: "{\"value\": [integer]}".into(),
            prerequisites,
            parent_task,
            associated_nodes: associated_nodes.into_iter().collect(),
        });
    }
    let activated = nodes.iter().filter(|_| r.random_bool(0.25)).cloned().collect();
    // Shuffle the declaration order so ranks are not visible in it.
    for i in (1..tasks.len()).rev() {
        let j = r.random_range(0..=i);
        tasks.swap(i, j);
    }
    RandomRegistry { tasks, nodes: nodes.into_iter().collect(), activated }
}

/// Selection computed from the definitions: closure under prerequisites,
/// then every task with a selected descendant is dropped.
pub fn expected_selection(tasks: &[ExtractionTask], activated: &BTreeSet<String>) -> BTreeSet<String> {
    let by_name: BTreeMap<&str, &ExtractionTask> = tasks.iter().map(|t| (t.name.as_str(), t)).collect();
    let mut selected = BTreeSet::new();
    let mut frontier: Vec<&str> = tasks
        .iter()
        .filter(|t| t.associated_nodes.iter().any(|n| activated.contains(n)))
        .map(|t| t.name.as_str())
        .collect();
    while let Some(t) = frontier.pop() {
        if selected.insert(t.to_string()) {
            frontier.extend(by_name[t].prerequisites.iter().map(String::as_str));
        }
    }
    let mut generalised = BTreeSet::new();
    for t in &selected {
        let mut cur = by_name[t.as_str()].parent_task.as_deref();
        while let Some(p) = cur {
            if selected.contains(p) {
                generalised.insert(p.to_string());
            }
            cur = by_name[p].parent_task.as_deref();
        }
    }
    selected.difference(&generalised).cloned().collect()
}
