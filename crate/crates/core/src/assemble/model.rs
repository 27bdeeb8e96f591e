//! The solver-independent model representation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::ProblemType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    NonnegInteger,
    NonnegContinuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Sense {
    pub fn symbol(&self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    pub fn latex(&self) -> &'static str {
        match self {
            Sense::Le => "\\leq",
            Sense::Ge => "\\geq",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    pub symbol: String,
    pub description: String,
    /// Member labels, indexed `1..=len`. For a subset, the parent indices.
    pub members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValues {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    Tensor3(Vec<Vec<Vec<f64>>>),
}

/// Shortest exact decimal form; integral values print without a fraction.
pub fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl ParamValues {
    pub fn all_finite(&self) -> bool {
        match self {
            ParamValues::Scalar(x) => x.is_finite(),
            ParamValues::Vector(v) => v.iter().all(|x| x.is_finite()),
            ParamValues::Matrix(m) => m.iter().flatten().all(|x| x.is_finite()),
            ParamValues::Tensor3(t) => t.iter().flatten().flatten().all(|x| x.is_finite()),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match self {
            ParamValues::Scalar(_) => vec![],
            ParamValues::Vector(v) => vec![v.len()],
            ParamValues::Matrix(m) => vec![m.len(), m.first().map_or(0, Vec::len)],
            ParamValues::Tensor3(t) => {
                vec![t.len(), t.first().map_or(0, Vec::len), t.first().and_then(|r| r.first()).map_or(0, Vec::len)]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub symbol: String,
    pub description: String,
    /// Symbols of the index sets, outermost first.
    pub indices: Vec<String>,
    pub values: ParamValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarFamily {
    pub symbol: String,
    pub description: String,
    pub indices: Vec<String>,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    /// Sanitized name, e.g. `x_3` or `y_2_1`.
    pub name: String,
    pub family: String,
    /// Index values into the family's sets (overtime indices start at 0).
    pub index: Vec<u32>,
    pub domain: Domain,
    pub lower: f64,
    #[serde(default)]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub var: usize,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<Term>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintFamily {
    pub label: String,
    pub description: String,
    /// Symbolic form in LaTeX.
    pub template: String,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub description: String,
    pub template: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelIr {
    pub problem_type: ProblemType,
    pub sets: Vec<IndexSet>,
    pub params: Vec<Param>,
    pub var_families: Vec<VarFamily>,
    pub vars: Vec<Variable>,
    pub constraints: Vec<ConstraintFamily>,
    pub objective: Objective,
    /// Model component to the id of the graph node it came from.
    pub provenance: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ModelIr {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn row_count(&self) -> usize {
        self.constraints.iter().map(|c| c.rows.len()).sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.constraints.iter().flat_map(|c| c.rows.iter())
    }

    pub fn family(&self, label: &str) -> Option<&ConstraintFamily> {
        self.constraints.iter().find(|c| c.label == label)
    }

    pub fn param(&self, symbol: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.symbol == symbol)
    }

    /// Checks referential integrity and that every number is finite.
    pub fn check(&self) -> Result<(), String> {
        let sets: BTreeMap<&str, usize> = self.sets.iter().map(|s| (s.symbol.as_str(), s.members.len())).collect();
        for p in &self.params {
            if !p.values.all_finite() {
                return Err(format!("parameter {} has a non-finite value", p.symbol));
            }
            let dims = p.values.dims();
            if dims.len() != p.indices.len() {
                return Err(format!(
                    "parameter {} has {} indices but {} dimensions",
                    p.symbol,
                    p.indices.len(),
                    dims.len()
                ));
            }
            for (set, &d) in p.indices.iter().zip(&dims) {
                match sets.get(set.as_str()) {
                    Some(&n) if n == d => {}
                    Some(&n) => return Err(format!("parameter {} spans {d} on {set} of size {n}", p.symbol)),
                    None => return Err(format!("parameter {} indexed by unknown set {set}", p.symbol)),
                }
            }
        }
        for f in &self.var_families {
            if let Some(set) = f.indices.iter().find(|s| !sets.contains_key(s.as_str())) {
                return Err(format!("variable family {} indexed by unknown set {set}", f.symbol));
            }
        }
        for v in &self.vars {
            if !self.var_families.iter().any(|f| f.symbol == v.family) {
                return Err(format!("variable {} has unknown family {}", v.name, v.family));
            }
            if v.upper.is_some_and(|u| u < v.lower) {
                return Err(format!("variable {} has empty bounds", v.name));
            }
        }
        let terms_ok = |terms: &[Term]| terms.iter().all(|t| t.var < self.vars.len() && t.coef.is_finite());
        for row in self.rows() {
            if !terms_ok(&row.terms) || !row.rhs.is_finite() {
                return Err(format!("row {} references a missing variable or non-finite number", row.name));
            }
        }
        if !terms_ok(&self.objective.terms) {
            return Err("objective references a missing variable or non-finite number".into());
        }
        Ok(())
    }
}
