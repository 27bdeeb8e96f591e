//! Modelling graphs: typed modelling components and their dependencies.
//!
//! A graph is authored data. It is loaded from a JSON document, checked by
//! [`validate_graph`], and then treated as immutable. The node catalog feeds
//! the component identification prompt.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const SHIFT_GRAPH: &str = include_str!("../data/graphs/shift.json");
const DAYS_OFF_GRAPH: &str = include_str!("../data/graphs/days_off.json");

/// Workforce scheduling problem family a graph (and an instance) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemType {
    #[serde(rename = "shift-scheduling", alias = "shift")]
    ShiftScheduling,
    #[serde(rename = "days-off-scheduling", alias = "days-off")]
    DaysOffScheduling,
}

impl ProblemType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemType::ShiftScheduling => "shift-scheduling",
            ProblemType::DaysOffScheduling => "days-off-scheduling",
        }
    }
}

impl fmt::Display for ProblemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProblemType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shift" | "shift-scheduling" => Ok(ProblemType::ShiftScheduling),
            "days-off" | "days-off-scheduling" => Ok(ProblemType::DaysOffScheduling),
            other => Err(format!("unknown problem type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Entity,
    Parameter,
    DecisionVariable,
    Objective,
    Constraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    HasParameter,
    UsesVariable,
    Constrains,
    ContributesToObjective,
    DependsOn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub name: String,
    pub kind: NodeKind,
    /// Prose inserted verbatim into the identification prompt.
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModellingGraph {
    pub problem_type: ProblemType,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Finding {
    EmptyGraph,
    DuplicateId { id: String },
    DuplicateName { name: String },
    EmptyDescription { id: String },
    DanglingEdge { from: String, to: String, missing: String },
    SelfLoop { id: String },
    NoDecisionVariable,
    UnreachableConstraint { id: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::EmptyGraph => write!(f, "graph has no nodes"),
            Finding::DuplicateId { id } => write!(f, "duplicate node id `{id}`"),
            Finding::DuplicateName { name } => write!(f, "duplicate node name `{name}`"),
            Finding::EmptyDescription { id } => write!(f, "node `{id}` has an empty description"),
            Finding::DanglingEdge { from, to, missing } => {
                write!(f, "edge {from} -> {to} references missing node `{missing}`")
            }
            Finding::SelfLoop { id } => write!(f, "self-loop on node `{id}`"),
            Finding::NoDecisionVariable => write!(f, "graph declares no decision variable"),
            Finding::UnreachableConstraint { id } => {
                write!(f, "constraint `{id}` is not reachable from any entity or parameter node")
            }
        }
    }
}

/// Every invariant violation found in a graph. Empty iff the graph is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read graph file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("graph format error at line {line}, column {column}: {message}\n  | {context}")]
    Format { line: usize, column: usize, message: String, context: String },
    #[error("invalid graph: {0}")]
    Validation(ValidationReport),
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<ModellingGraph, GraphError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| GraphError::Io { path: path.display().to_string(), source })?;
    parse_graph(&text)
}

/// Parses and validates a graph document.
pub fn parse_graph(text: &str) -> Result<ModellingGraph, GraphError> {
    let graph: ModellingGraph = serde_json::from_str(text).map_err(|e| format_error(text, &e))?;
    let report = validate_graph(&graph);
    if report.is_valid() {
        Ok(graph)
    } else {
        Err(GraphError::Validation(report))
    }
}

pub(crate) fn format_error(text: &str, e: &serde_json::Error) -> GraphError {
    let line = e.line();
    let context = text.lines().nth(line.saturating_sub(1)).unwrap_or_default().trim_end().to_string();
    GraphError::Format { line, column: e.column(), message: e.to_string(), context }
}

/// The bundled graph for a problem type.
pub fn bundled_graph(problem_type: ProblemType) -> ModellingGraph {
    let text = match problem_type {
        ProblemType::ShiftScheduling => SHIFT_GRAPH,
        ProblemType::DaysOffScheduling => DAYS_OFF_GRAPH,
    };
    parse_graph(text).expect("bundled graph is valid")
}

pub fn validate_graph(g: &ModellingGraph) -> ValidationReport {
    let mut findings = Vec::new();
    if g.nodes.is_empty() {
        findings.push(Finding::EmptyGraph);
    }

    let mut ids = BTreeSet::new();
    let mut names = BTreeSet::new();
    for node in &g.nodes {
        if !ids.insert(node.id.as_str()) {
            findings.push(Finding::DuplicateId { id: node.id.clone() });
        }
        if !names.insert(node.name.as_str()) {
            findings.push(Finding::DuplicateName { name: node.name.clone() });
        }
        if node.description.trim().is_empty() {
            findings.push(Finding::EmptyDescription { id: node.id.clone() });
        }
    }

    for edge in &g.edges {
        for end in [&edge.from, &edge.to] {
            if !ids.contains(end.as_str()) {
                findings.push(Finding::DanglingEdge {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                    missing: end.clone(),
                });
            }
        }
        if edge.from == edge.to {
            findings.push(Finding::SelfLoop { id: edge.from.clone() });
        }
    }

    if !g.nodes.is_empty() && !g.nodes.iter().any(|n| n.kind == NodeKind::DecisionVariable) {
        findings.push(Finding::NoDecisionVariable);
    }

    // Reachability of constraints from the data layer (entities and parameters).
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for edge in &g.edges {
        adjacency.entry(edge.from.as_str()).or_default().push(edge.to.as_str());
    }
    let mut reached = BTreeSet::new();
    let mut queue: VecDeque<&str> = g
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Entity | NodeKind::Parameter))
        .map(|n| n.id.as_str())
        .collect();
    while let Some(id) = queue.pop_front() {
        for &next in adjacency.get(id).map(Vec::as_slice).unwrap_or_default() {
            if reached.insert(next) {
                queue.push_back(next);
            }
        }
    }
    for node in g.nodes.iter().filter(|n| n.kind == NodeKind::Constraint) {
        if !reached.contains(node.id.as_str()) {
            findings.push(Finding::UnreachableConstraint { id: node.id.clone() });
        }
    }

    ValidationReport { findings }
}

impl ModellingGraph {
    /// `(name, description)` pairs in declaration order.
    pub fn node_catalog(&self) -> Vec<(&str, &str)> {
        self.nodes.iter().map(|n| (n.name.as_str(), n.description.as_str())).collect()
    }

    pub fn node_by_name(&self, name: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn node_by_id(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_names(&self) -> BTreeSet<String> {
        self.nodes.iter().map(|n| n.name.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }
}

/// Free-function form of [`ModellingGraph::node_catalog`].
pub fn node_catalog(g: &ModellingGraph) -> Vec<(&str, &str)> {
    g.node_catalog()
}

/// Lowercase-hyphenated id derived from a display name.
pub fn node_id_from_name(name: &str) -> String {
    let mut id = String::with_capacity(name.len());
    let mut pending_dash = false;
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            if pending_dash && !id.is_empty() {
                id.push('-');
            }
            pending_dash = false;
            id.push(c.to_ascii_lowercase());
        } else {
            pending_dash = true;
        }
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, kind: NodeKind) -> GraphNode {
        GraphNode { id: id.into(), name: id.to_uppercase(), kind, description: format!("{id} description") }
    }

    fn edge(from: &str, to: &str) -> GraphEdge {
        GraphEdge { from: from.into(), to: to.into(), relation: Relation::Constrains }
    }

    fn small_graph() -> ModellingGraph {
        ModellingGraph {
            problem_type: ProblemType::ShiftScheduling,
            nodes: vec![
                node("p", NodeKind::Parameter),
                node("x", NodeKind::DecisionVariable),
                node("c", NodeKind::Constraint),
            ],
            edges: vec![edge("p", "c"), edge("c", "x")],
        }
    }

    #[test]
    fn bundled_graphs_are_valid() {
        for pt in [ProblemType::ShiftScheduling, ProblemType::DaysOffScheduling] {
            let g = bundled_graph(pt);
            assert!(validate_graph(&g).is_valid());
            assert_eq!(g.problem_type, pt);
        }
    }

    #[test]
    fn shift_graph_has_identification_nodes() {
        let g = bundled_graph(ProblemType::ShiftScheduling);
        for name in ["Planning Horizon", "Periods", "Shifts", "Overtimes", "Breaks"] {
            assert!(g.node_by_name(name).is_some(), "missing {name}");
        }
        let catalog = g.node_catalog();
        assert_eq!(
            catalog[0],
            ("Planning Horizon", "The total time period over which scheduling or planning is conducted.")
        );
        assert_eq!(catalog.len(), g.nodes.len());
    }

    #[test]
    fn node_ids_derive_from_names() {
        let g = bundled_graph(ProblemType::ShiftScheduling);
        for n in &g.nodes {
            assert_eq!(n.id, node_id_from_name(&n.name), "node {}", n.name);
        }
        assert_eq!(node_id_from_name("Types of breaks"), "types-of-breaks");
        assert_eq!(node_id_from_name("Weekend-off Ratio"), "weekend-off-ratio");
    }

    #[test]
    fn empty_node_list_is_invalid() {
        let g = ModellingGraph { problem_type: ProblemType::ShiftScheduling, nodes: vec![], edges: vec![] };
        assert_eq!(validate_graph(&g).findings, vec![Finding::EmptyGraph]);
        let err = parse_graph(r#"{"problem_type": "shift-scheduling", "nodes": [], "edges": []}"#).unwrap_err();
        assert!(matches!(err, GraphError::Validation(_)));
    }

    #[test]
    fn dangling_edge_names_missing_node() {
        let mut g = small_graph();
        g.edges.push(edge("p", "X"));
        let report = validate_graph(&g);
        assert_eq!(report.findings.len(), 1);
        assert!(report.to_string().contains("`X`"));
    }

    #[test]
    fn duplicate_id_and_self_loop_findings() {
        let mut g = small_graph();
        let mut dup = node("p", NodeKind::Entity);
        dup.name = "Other".into();
        g.nodes.push(dup);
        assert_eq!(validate_graph(&g).findings, vec![Finding::DuplicateId { id: "p".into() }]);

        let mut g = small_graph();
        g.edges.push(edge("x", "x"));
        assert_eq!(validate_graph(&g).findings, vec![Finding::SelfLoop { id: "x".into() }]);
    }

    #[test]
    fn unreachable_constraint_is_reported() {
        let mut g = small_graph();
        g.nodes.push(node("orphan", NodeKind::Constraint));
        assert_eq!(validate_graph(&g).findings, vec![Finding::UnreachableConstraint { id: "orphan".into() }]);
    }

    #[test]
    fn format_error_carries_line_context() {
        let text = "{\n  \"problem_type\": \"shift-scheduling\",\n  \"nodes\": [oops]\n}";
        match parse_graph(text).unwrap_err() {
            GraphError::Format { line, context, .. } => {
                assert_eq!(line, 3);
                assert!(context.contains("oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_node_catalog() {
        let g = ModellingGraph {
            problem_type: ProblemType::DaysOffScheduling,
            nodes: vec![node("x", NodeKind::DecisionVariable)],
            edges: vec![],
        };
        assert_eq!(g.node_catalog().len(), 1);
    }

    #[test]
    fn serialization_round_trips() {
        for pt in [ProblemType::ShiftScheduling, ProblemType::DaysOffScheduling] {
            let g = bundled_graph(pt);
            assert_eq!(parse_graph(&g.to_json()).unwrap(), g);
        }
    }
}
