//! Solver input: a flat MILP with explicit bounds.

use serde::{Deserialize, Serialize};

use crate::assemble::{Domain, ModelIr, ObjectiveSense, Sense};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfRow {
    pub name: String,
    /// Sparse `(column, coefficient)` pairs.
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardForm {
    pub sense: ObjectiveSense,
    pub objective: Vec<f64>,
    pub rows: Vec<SfRow>,
    /// May be `-inf`.
    pub lower: Vec<f64>,
    /// May be `+inf`.
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub names: Vec<String>,
}

impl StandardForm {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn from_model(m: &ModelIr) -> Self {
        let n = m.vars.len();
        let mut objective = vec![0.0; n];
        for t in &m.objective.terms {
            objective[t.var] += t.coef;
        }
        let rows = m
            .rows()
            .map(|r| SfRow {
                name: r.name.clone(),
                coefs: r.terms.iter().map(|t| (t.var, t.coef)).collect(),
                sense: r.sense,
                rhs: r.rhs,
            })
            .collect();
        let sf = StandardForm {
            sense: m.objective.sense,
            objective,
            rows,
            lower: m.vars.iter().map(|v| v.lower).collect(),
            upper: m
                .vars
                .iter()
                .map(|v| match (v.domain, v.upper) {
                    (Domain::Binary, u) => u.unwrap_or(1.0).min(1.0),
                    (_, Some(u)) => u,
                    (_, None) => f64::INFINITY,
                })
                .collect(),
            integer: m.vars.iter().map(|v| v.domain != Domain::NonnegContinuous).collect(),
            names: m.vars.iter().map(|v| v.name.clone()).collect(),
        };
        debug_assert!(sf.validate().is_ok());
        sf
    }

    /// Finite data, consistent lengths, `lower <= upper`.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.num_vars();
        if [self.lower.len(), self.upper.len(), self.integer.len(), self.names.len()].iter().any(|&l| l != n) {
            return Err("variable vectors have inconsistent lengths".into());
        }
        if let Some(j) = (0..n).find(|&j| !self.objective[j].is_finite()) {
            return Err(format!("objective coefficient of {} is not finite", self.names[j]));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return Err(format!("variable {} has invalid bounds [{l}, {u}]", self.names[j]));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() || r.coefs.iter().any(|&(j, c)| j >= n || !c.is_finite()) {
                return Err(format!("row {} has a non-finite number or unknown column", r.name));
            }
        }
        Ok(())
    }

    /// Largest row violation of `x`, scaled by nothing: an absolute residual.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let lhs: f64 = r.coefs.iter().map(|&(j, c)| c * x[j]).sum();
            let v = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - xj).max(xj - self.upper[j]);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}
