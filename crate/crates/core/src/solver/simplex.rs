//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! Every internal column lives in `[0, u]` with `u` possibly infinite.
//! Nonbasic columns sit at one of their bounds, so a bound change never
//! needs a row. Dantzig pricing is used until a run of degenerate pivots,
//! after which the phase finishes under Bland's rule.

use crate::assemble::Sense;

use super::standard::StandardForm;
use super::SolverError;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
pub(crate) const DEGENERACY_STREAK: usize = 25;
const LOG_TAIL: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy)]
enum ColMap {
    /// `x = l + x'`.
    Shift { col: usize, offset: f64 },
    /// `x = u - x'`.
    Mirror { col: usize, offset: f64 },
    /// `x = x⁺ - x⁻`.
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Tableau {
    t: Vec<Vec<f64>>,
    beta: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    excluded: Vec<bool>,
    d: Vec<f64>,
    iterations: usize,
    limit: usize,
    log: Vec<String>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.upper.len()
    }

    fn note(&mut self, line: String) {
        if self.log.len() == LOG_TAIL {
            self.log.remove(0);
        }
        self.log.push(line);
    }

    fn price(&mut self, cost: &[f64]) {
        self.d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (k, dk) in self.d.iter_mut().enumerate() {
                    *dk -= cb * self.t[i][k];
                }
            }
        }
    }

    fn refresh_values(&mut self) {
        let mut xb = self.beta.clone();
        for k in 0..self.ncols() {
            if self.row_of[k].is_none() && self.at_upper[k] {
                for (i, x) in xb.iter_mut().enumerate() {
                    *x -= self.t[i][k] * self.upper[k];
                }
            }
        }
        self.xb = xb;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.beta[r] /= p;
        let (pivot_row, pivot_beta) = (self.t[r].clone(), self.beta[r]);
        for i in 0..self.t.len() {
            if i == r {
                continue;
            }
            let f = self.t[i][j];
            if f != 0.0 {
                for (v, pv) in self.t[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.t[i][j] = 0.0;
                self.beta[i] -= f * pivot_beta;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (v, pv) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = None;
        self.basis[r] = j;
        self.row_of[j] = Some(r);
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..self.ncols() {
            if self.row_of[k].is_some() || self.excluded[k] || self.upper[k] <= 0.0 {
                continue;
            }
            let score = if self.at_upper[k] { self.d[k] } else { -self.d[k] };
            if score > COST_TOL {
                if bland {
                    return Some(k);
                }
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((k, score));
                }
            }
        }
        best.map(|(k, _)| k)
    }

    /// Runs pivots until no improving column remains.
    fn run(&mut self, phase: Phase) -> Result<bool, SolverError> {
        let mut streak = 0;
        let mut bland = false;
        loop {
            let Some(j) = self.entering(bland) else {
                return Ok(true);
            };
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(SolverError::Numerical {
                    message: format!("simplex exceeded {} iterations", self.limit),
                    log: self.log.clone(),
                });
            }
            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };
            // Smallest step that keeps every basic column within bounds.
            let mut theta = self.upper[j];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0;
            for i in 0..self.t.len() {
                let alpha = dir * self.t[i][j];
                let (ratio, to_upper) = if alpha > PIVOT_TOL {
                    (self.xb[i].max(0.0) / alpha, false)
                } else if alpha < -PIVOT_TOL && self.upper[self.basis[i]].is_finite() {
                    ((self.upper[self.basis[i]] - self.xb[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    _ if ratio < theta - DEGENERATE_STEP => true,
                    Some((li, _)) if ratio <= theta + DEGENERATE_STEP => {
                        if bland {
                            self.basis[i] < self.basis[li]
                        } else {
                            alpha.abs() > leave_alpha
                        }
                    }
                    _ => false,
                };
                if better {
                    theta = ratio;
                    leave = Some((i, to_upper));
                    leave_alpha = alpha.abs();
                }
            }
            if !theta.is_finite() {
                return Ok(false);
            }
            for i in 0..self.t.len() {
                self.xb[i] -= theta * dir * self.t[i][j];
            }
            let entering_value = if self.at_upper[j] { self.upper[j] - theta } else { theta };
            match leave {
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                    self.note(format!("{phase:?}: column {j} flips bound, step {theta:e}"));
                }
                Some((r, to_upper)) => {
                    let leaving = self.basis[r];
                    self.note(format!("{phase:?}: column {j} enters, {leaving} leaves row {r}, step {theta:e}"));
                    self.pivot(r, j);
                    self.at_upper[leaving] = to_upper;
                    self.at_upper[j] = false;
                    self.xb[r] = entering_value;
                }
            }
            if theta <= DEGENERATE_STEP {
                streak += 1;
                if streak >= DEGENERACY_STREAK && !bland {
                    bland = true;
                    self.note(format!("{phase:?}: switching to Bland's rule after {streak} degenerate pivots"));
                }
            } else {
                streak = 0;
            }
        }
    }
}

/// Minimises `cost · x` over the rows of `sf` with the given bounds.
pub(crate) fn solve(
    sf: &StandardForm,
    cost: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<(LpOutcome, usize), SolverError> {
    let n = sf.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut col_upper = Vec::new();
    for j in 0..n {
        let (l, u) = (lower[j], upper[j]);
        let map = if l.is_finite() {
            col_upper.push(u - l);
            ColMap::Shift { col: col_upper.len() - 1, offset: l }
        } else if u.is_finite() {
            col_upper.push(f64::INFINITY);
            ColMap::Mirror { col: col_upper.len() - 1, offset: u }
        } else {
            col_upper.push(f64::INFINITY);
            col_upper.push(f64::INFINITY);
            ColMap::Split { pos: col_upper.len() - 2, neg: col_upper.len() - 1 }
        };
        maps.push(map);
    }
    let structural = col_upper.len();

    // Rows in internal columns with a non-negative right-hand side.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::with_capacity(sf.rows.len());
    for r in &sf.rows {
        let mut coefs = vec![0.0; structural];
        let mut rhs = r.rhs;
        for &(j, a) in &r.coefs {
            match maps[j] {
                ColMap::Shift { col, offset } => {
                    coefs[col] += a;
                    rhs -= a * offset;
                }
                ColMap::Mirror { col, offset } => {
                    coefs[col] -= a;
                    rhs -= a * offset;
                }
                ColMap::Split { pos, neg } => {
                    coefs[pos] += a;
                    coefs[neg] -= a;
                }
            }
        }
        let mut sense = r.sense;
        if rhs < 0.0 {
            coefs.iter_mut().for_each(|c| *c = -*c);
            rhs = -rhs;
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push((coefs, sense, rhs));
    }

    let m = rows.len();
    let slacks = rows.iter().filter(|(_, s, _)| *s != Sense::Eq).count();
    let artificials = rows.iter().filter(|(_, s, _)| *s != Sense::Le).count();
    let ncols = structural + slacks + artificials;
    let mut t = vec![vec![0.0; ncols]; m];
    let mut basis = vec![0; m];
    let mut is_artificial = vec![false; ncols];
    let (mut next_slack, mut next_art) = (structural, structural + slacks);
    for (i, (coefs, sense, _)) in rows.iter().enumerate() {
        t[i][..structural].copy_from_slice(coefs);
        match sense {
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
                is_artificial[next_art] = true;
                next_art += 1;
            }
            Sense::Eq => {
                t[i][next_art] = 1.0;
                basis[i] = next_art;
                is_artificial[next_art] = true;
                next_art += 1;
            }
        }
    }
    let mut upper_all = col_upper;
    upper_all.resize(ncols, f64::INFINITY);
    let mut row_of = vec![None; ncols];
    for (i, &b) in basis.iter().enumerate() {
        row_of[b] = Some(i);
    }
    let beta: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let mut tab = Tableau {
        t,
        xb: beta.clone(),
        beta,
        basis,
        row_of,
        upper: upper_all,
        at_upper: vec![false; ncols],
        excluded: vec![false; ncols],
        d: Vec::new(),
        iterations: 0,
        limit: 10_000 + 200 * (m + ncols),
        log: Vec::new(),
    };

    // Phase one: minimise the sum of artificials.
    if artificials > 0 {
        let phase_one: Vec<f64> = is_artificial.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        tab.price(&phase_one);
        tab.run(Phase::One)?;
        tab.refresh_values();
        let infeasibility: f64 = (0..m).filter(|&i| is_artificial[tab.basis[i]]).map(|i| tab.xb[i]).sum();
        let scale = rows.iter().map(|r| r.2).fold(1.0, f64::max);
        if infeasibility > 1e-7 * scale {
            return Ok((LpOutcome::Infeasible, tab.iterations));
        }
        for k in (0..ncols).filter(|&k| is_artificial[k]) {
            tab.upper[k] = 0.0;
            tab.excluded[k] = true;
        }
        // Drive zero-valued artificials out of the basis where a pivot exists.
        for r in 0..m {
            if !is_artificial[tab.basis[r]] {
                continue;
            }
            let candidate = (0..ncols)
                .filter(|&k| !is_artificial[k] && tab.row_of[k].is_none())
                .max_by(|&a, &b| tab.t[r][a].abs().total_cmp(&tab.t[r][b].abs()));
            if let Some(k) = candidate.filter(|&k| tab.t[r][k].abs() > 1e-7) {
                let value = if tab.at_upper[k] { tab.upper[k] } else { 0.0 };
                tab.pivot(r, k);
                tab.at_upper[k] = false;
                tab.xb[r] = value;
            }
        }
        tab.refresh_values();
    }

    let mut phase_two = vec![0.0; ncols];
    for (j, map) in maps.iter().enumerate() {
        match *map {
            ColMap::Shift { col, .. } => phase_two[col] = cost[j],
            ColMap::Mirror { col, .. } => phase_two[col] = -cost[j],
            ColMap::Split { pos, neg } => {
                phase_two[pos] = cost[j];
                phase_two[neg] = -cost[j];
            }
        }
    }
    tab.price(&phase_two);
    if !tab.run(Phase::Two)? {
        return Ok((LpOutcome::Unbounded, tab.iterations));
    }
    tab.refresh_values();

    let value = |k: usize| match tab.row_of[k] {
        Some(r) => tab.xb[r],
        None if tab.at_upper[k] => tab.upper[k],
        None => 0.0,
    };
    let x: Vec<f64> = maps
        .iter()
        .enumerate()
        .map(|(j, map)| {
            let v = match *map {
                ColMap::Shift { col, offset } => offset + value(col),
                ColMap::Mirror { col, offset } => offset - value(col),
                ColMap::Split { pos, neg } => value(pos) - value(neg),
            };
            v.clamp(lower[j], upper[j])
        })
        .collect();
    let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok((LpOutcome::Optimal { x, objective }, tab.iterations))
}
