//! Embedded MILP solver: bounded primal simplex plus branch-and-bound.

mod bnb;
mod lp_parse;
mod simplex;
mod standard;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assemble::{ModelIr, ObjectiveSense};

pub use lp_parse::{parse_lp, LpParseError};
pub use standard::{SfRow, StandardForm};

pub const INT_TOL: f64 = 1e-6;
pub const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NodeLimit => "node-limit",
        })
    }
}

/// A bound added before branching on an integer column that had none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoBound {
    pub var: String,
    pub upper: f64,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective of the returned assignment; absent without one.
    pub objective: Option<f64>,
    pub assignment: IndexMap<String, f64>,
    pub nodes_explored: usize,
    pub best_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub auto_bounds: Vec<AutoBound>,
    pub simplex_iterations: usize,
}

impl SolveResult {
    fn empty(auto_bounds: Vec<AutoBound>) -> Self {
        SolveResult {
            status: SolveStatus::Infeasible,
            objective: None,
            assignment: IndexMap::new(),
            nodes_explored: 0,
            best_bound: None,
            auto_bounds,
            simplex_iterations: 0,
        }
    }

    fn with(mut self, status: SolveStatus, nodes: usize, iterations: usize) -> Self {
        self.status = status;
        self.nodes_explored = nodes;
        self.simplex_iterations = iterations;
        self
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Values in column order of the assignment.
    pub fn values(&self) -> Vec<f64> {
        self.assignment.values().copied().collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("numerical breakdown: {message}")]
    Numerical { message: String, log: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOptions {
    pub node_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { node_limit: 200_000 }
    }
}

fn sign(sf: &StandardForm) -> f64 {
    match sf.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    }
}

/// Solves the continuous relaxation.
pub fn solve_lp(sf: &StandardForm) -> Result<SolveResult, SolverError> {
    sf.validate().map_err(SolverError::Invalid)?;
    let sign = sign(sf);
    let cost: Vec<f64> = sf.objective.iter().map(|c| sign * c).collect();
    let (out, iterations) = simplex::solve(sf, &cost, &sf.lower, &sf.upper)?;
    let mut result = SolveResult::empty(Vec::new());
    match out {
        simplex::LpOutcome::Optimal { x, objective } => {
            result = result.with(SolveStatus::Optimal, 1, iterations);
            result.objective = Some(sign * objective);
            result.best_bound = result.objective;
            result.assignment = sf.names.iter().cloned().zip(x).collect();
        }
        simplex::LpOutcome::Infeasible => result = result.with(SolveStatus::Infeasible, 1, iterations),
        simplex::LpOutcome::Unbounded => result = result.with(SolveStatus::Unbounded, 1, iterations),
    }
    Ok(result)
}

pub fn solve_milp(sf: &StandardForm) -> Result<SolveResult, SolverError> {
    solve_milp_with(sf, &SolverOptions::default())
}

pub fn solve_milp_with(sf: &StandardForm, opts: &SolverOptions) -> Result<SolveResult, SolverError> {
    sf.validate().map_err(SolverError::Invalid)?;
    bnb::solve(sf, opts)
}

pub fn solve_model(m: &ModelIr) -> Result<SolveResult, SolverError> {
    solve_milp(&StandardForm::from_model(m))
}

#[cfg(test)]
mod tests;
