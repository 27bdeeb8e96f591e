//! Information-extraction tasks and the planner that selects and orders them.
//!
//! Selection starts from the tasks associated with activated graph nodes,
//! closes the set under prerequisites, and then drops every generalised
//! (parent) task that has a more specific task selected alongside it. The
//! ordering is Kahn's algorithm with a lexicographic frontier so that plans
//! are reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ModellingGraph, ProblemType};

const SHIFT_REGISTRY: &str = include_str!("../data/registries/shift.json");
const DAYS_OFF_REGISTRY: &str = include_str!("../data/registries/days_off.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionTask {
    pub name: String,
    pub description: String,
    /// Expected output block, inserted verbatim into the prompt.
    pub output_schema: String,
    #[serde(default)]
    pub prerequisites: Vec<String>,
    #[serde(default)]
    pub parent_task: Option<String>,
    #[serde(default)]
    pub associated_nodes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RegistryFile {
    tasks: Vec<ExtractionTask>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("cannot read registry file {path}: {message}")]
    Io { path: String, message: String },
    #[error("registry format error at line {line}, column {column}: {message}")]
    Format { line: usize, column: usize, message: String },
    #[error("duplicate task `{0}`")]
    DuplicateTask(String),
    #[error("task `{task}` references unknown node `{node}`")]
    UnknownNode { task: String, node: String },
    #[error("task `{task}` references unknown task `{reference}`")]
    UnknownTask { task: String, reference: String },
    #[error("task `{0}` names itself as its parent")]
    SelfParent(String),
    #[error("parent links form a cycle through `{0}`")]
    ParentCycle(String),
    #[error("activated node `{0}` is not a node of the modelling graph")]
    UnknownActivatedNode(String),
    #[error("prerequisite cycle among tasks: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("selection is not closed: task `{task}` requires `{prerequisite}`")]
    NotClosed { task: String, prerequisite: String },
}

/// A validated set of extraction tasks for one modelling graph.
#[derive(Debug, Clone)]
pub struct TaskRegistry {
    tasks: Vec<ExtractionTask>,
    index: BTreeMap<String, usize>,
    node_names: BTreeSet<String>,
}

impl TaskRegistry {
    /// Builds a registry, checking every task invariant against `node_names`.
    pub fn new(tasks: Vec<ExtractionTask>, node_names: BTreeSet<String>) -> Result<Self, RegistryError> {
        let registry = Self::new_unchecked(tasks, node_names)?;
        registry.validate()?;
        Ok(registry)
    }

    /// Builds a registry checking only name uniqueness. Reference and
    /// acyclicity checks are skipped; the planner still detects cycles.
    pub fn new_unchecked(tasks: Vec<ExtractionTask>, node_names: BTreeSet<String>) -> Result<Self, RegistryError> {
        let mut index = BTreeMap::new();
        for (i, task) in tasks.iter().enumerate() {
            if index.insert(task.name.clone(), i).is_some() {
                return Err(RegistryError::DuplicateTask(task.name.clone()));
            }
        }
        Ok(Self { tasks, index, node_names })
    }

    fn validate(&self) -> Result<(), RegistryError> {
        for task in &self.tasks {
            for node in &task.associated_nodes {
                if !self.node_names.contains(node) {
                    return Err(RegistryError::UnknownNode { task: task.name.clone(), node: node.clone() });
                }
            }
            for reference in task.prerequisites.iter().chain(task.parent_task.iter()) {
                if !self.index.contains_key(reference) {
                    return Err(RegistryError::UnknownTask { task: task.name.clone(), reference: reference.clone() });
                }
            }
            if task.parent_task.as_deref() == Some(task.name.as_str()) {
                return Err(RegistryError::SelfParent(task.name.clone()));
            }
        }
        for task in &self.tasks {
            let mut seen = BTreeSet::new();
            let mut cursor = task.parent_task.as_deref();
            while let Some(parent) = cursor {
                if !seen.insert(parent) || parent == task.name {
                    return Err(RegistryError::ParentCycle(task.name.clone()));
                }
                cursor = self.get(parent).and_then(|p| p.parent_task.as_deref());
            }
        }
        let all: BTreeSet<String> = self.index.keys().cloned().collect();
        let selection = TaskSelection { tasks: all, replaced: BTreeMap::new() };
        order_tasks(self, &selection).map(|_| ())
    }

    pub fn get(&self, name: &str) -> Option<&ExtractionTask> {
        self.index.get(name).map(|&i| &self.tasks[i])
    }

    pub fn tasks(&self) -> &[ExtractionTask] {
        &self.tasks
    }

    pub fn node_names(&self) -> &BTreeSet<String> {
        &self.node_names
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Parent chain of a task, nearest first.
    pub fn ancestors(&self, name: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cursor = self.get(name).and_then(|t| t.parent_task.as_deref());
        while let Some(parent) = cursor {
            if out.contains(&parent) || parent == name {
                break;
            }
            out.push(parent);
            cursor = self.get(parent).and_then(|t| t.parent_task.as_deref());
        }
        out
    }
}

pub fn parse_registry(text: &str, g: &ModellingGraph) -> Result<TaskRegistry, RegistryError> {
    let file: RegistryFile = serde_json::from_str(text).map_err(|e| RegistryError::Format {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    TaskRegistry::new(file.tasks, g.node_names())
}

pub fn load_registry(path: impl AsRef<Path>, g: &ModellingGraph) -> Result<TaskRegistry, RegistryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| RegistryError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_registry(&text, g)
}

/// The bundled registry for a problem type, validated against `g`.
pub fn bundled_registry(problem_type: ProblemType, g: &ModellingGraph) -> Result<TaskRegistry, RegistryError> {
    let text = match problem_type {
        ProblemType::ShiftScheduling => SHIFT_REGISTRY,
        ProblemType::DaysOffScheduling => DAYS_OFF_REGISTRY,
    };
    parse_registry(text, g)
}

/// Outcome of task selection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSelection {
    pub tasks: BTreeSet<String>,
    /// Removed generalised task -> the selected specific tasks replacing it.
    pub replaced: BTreeMap<String, Vec<String>>,
}

pub fn select_tasks(registry: &TaskRegistry, activated: &BTreeSet<String>) -> Result<TaskSelection, RegistryError> {
    if let Some(unknown) = activated.iter().find(|n| !registry.node_names.contains(*n)) {
        return Err(RegistryError::UnknownActivatedNode(unknown.clone()));
    }

    let mut selected = BTreeSet::new();
    let mut stack: Vec<&str> = registry
        .tasks
        .iter()
        .filter(|t| t.associated_nodes.iter().any(|n| activated.contains(n)))
        .map(|t| t.name.as_str())
        .collect();
    while let Some(name) = stack.pop() {
        if !selected.insert(name.to_string()) {
            continue;
        }
        if let Some(task) = registry.get(name) {
            stack.extend(task.prerequisites.iter().map(String::as_str));
        }
    }

    // Generalised tasks give way to the specific tasks selected with them.
    // Their prerequisites stay selected.
    let mut replaced: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for name in &selected {
        for ancestor in registry.ancestors(name) {
            if selected.contains(ancestor) {
                replaced.entry(ancestor.to_string()).or_default().push(name.clone());
            }
        }
    }
    for parent in replaced.keys() {
        selected.remove(parent);
    }
    for specifics in replaced.values_mut() {
        specifics.retain(|s| selected.contains(s));
        specifics.sort();
    }
    replaced.retain(|_, specifics| !specifics.is_empty());

    Ok(TaskSelection { tasks: selected, replaced })
}

/// A dependency-valid execution order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskPlan {
    pub ordered_tasks: Vec<String>,
    /// Removed generalised task -> specific tasks whose output stands in for it.
    #[serde(default)]
    pub aliases: BTreeMap<String, Vec<String>>,
}

impl TaskPlan {
    pub fn position(&self, task: &str) -> Option<usize> {
        self.ordered_tasks.iter().position(|t| t == task)
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_tasks.is_empty()
    }

    /// Checks the plan invariants against `registry`; returns the first violation.
    pub fn check(&self, registry: &TaskRegistry) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for (i, name) in self.ordered_tasks.iter().enumerate() {
            if !seen.insert(name) {
                return Err(format!("duplicate task `{name}`"));
            }
            let task = registry.get(name).ok_or_else(|| format!("unknown task `{name}`"))?;
            for prerequisite in &task.prerequisites {
                let providers = self.providers(prerequisite);
                if providers.is_empty() {
                    return Err(format!("`{name}` requires unplanned `{prerequisite}`"));
                }
                for p in providers {
                    if p == name.as_str() {
                        continue;
                    }
                    match self.position(p) {
                        Some(j) if j < i => {}
                        _ => return Err(format!("`{p}` must run before `{name}`")),
                    }
                }
            }
            for ancestor in registry.ancestors(name) {
                if self.position(ancestor).is_some() {
                    return Err(format!("`{name}` planned together with its parent `{ancestor}`"));
                }
            }
        }
        Ok(())
    }

    /// Planned tasks that provide the output named `task`.
    fn providers<'a>(&'a self, task: &'a str) -> Vec<&'a str> {
        if self.position(task).is_some() {
            vec![task]
        } else {
            self.aliases.get(task).map(|v| v.iter().map(String::as_str).collect()).unwrap_or_default()
        }
    }
}

pub fn order_tasks(registry: &TaskRegistry, selection: &TaskSelection) -> Result<TaskPlan, RegistryError> {
    // Edges prerequisite -> dependent, with removed parents resolved to their replacements.
    let mut dependents: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut in_degree: BTreeMap<&str, usize> = BTreeMap::new();
    for name in &selection.tasks {
        in_degree.entry(name.as_str()).or_insert(0);
        dependents.entry(name.as_str()).or_default();
    }
    for name in &selection.tasks {
        let Some(task) = registry.get(name) else {
            return Err(RegistryError::UnknownTask { task: name.clone(), reference: name.clone() });
        };
        let mut sources: BTreeSet<&str> = BTreeSet::new();
        for prerequisite in &task.prerequisites {
            if selection.tasks.contains(prerequisite) {
                sources.insert(prerequisite.as_str());
            } else if let Some(specifics) = selection.replaced.get(prerequisite) {
                sources.extend(specifics.iter().map(String::as_str).filter(|s| *s != name.as_str()));
            } else {
                return Err(RegistryError::NotClosed { task: name.clone(), prerequisite: prerequisite.clone() });
            }
        }
        for source in sources {
            if dependents.entry(source).or_default().insert(name.as_str()) {
                *in_degree.entry(name.as_str()).or_insert(0) += 1;
            }
        }
    }

    let mut ready: BTreeSet<&str> = in_degree.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
    let mut ordered = Vec::with_capacity(selection.tasks.len());
    while let Some(next) = ready.pop_first() {
        ordered.push(next.to_string());
        for &dependent in &dependents[next] {
            let degree = in_degree.get_mut(dependent).expect("known task");
            *degree -= 1;
            if *degree == 0 {
                ready.insert(dependent);
            }
        }
    }

    if ordered.len() < selection.tasks.len() {
        let remaining: BTreeSet<&str> = in_degree.iter().filter(|(_, &d)| d > 0).map(|(&n, _)| n).collect();
        return Err(RegistryError::Cycle(find_cycle(&dependents, &remaining)));
    }

    Ok(TaskPlan { ordered_tasks: ordered, aliases: selection.replaced.clone() })
}

/// Extracts one concrete cycle from the nodes left over by Kahn's algorithm.
fn find_cycle(dependents: &BTreeMap<&str, BTreeSet<&str>>, remaining: &BTreeSet<&str>) -> Vec<String> {
    // Every remaining node has a remaining predecessor, so following
    // predecessors eventually revisits a node.
    let mut predecessor: BTreeMap<&str, &str> = BTreeMap::new();
    for (&from, tos) in dependents {
        if !remaining.contains(from) {
            continue;
        }
        for &to in tos {
            if remaining.contains(to) {
                predecessor.entry(to).or_insert(from);
            }
        }
    }
    let Some(&start) = remaining.iter().next() else {
        return Vec::new();
    };
    let mut path = vec![start];
    let mut cursor = start;
    loop {
        let Some(&prev) = predecessor.get(cursor) else {
            return remaining.iter().map(|s| s.to_string()).collect();
        };
        if let Some(pos) = path.iter().position(|&p| p == prev) {
            let mut cycle: Vec<String> = path[pos..].iter().rev().map(|s| s.to_string()).collect();
            // Rotate so the lexicographically smallest task comes first.
            let min = cycle.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
            cycle.rotate_left(min);
            return cycle;
        }
        path.push(prev);
        cursor = prev;
    }
}

/// Selection followed by ordering.
pub fn plan_for_nodes(registry: &TaskRegistry, activated: &BTreeSet<String>) -> Result<TaskPlan, RegistryError> {
    let selection = select_tasks(registry, activated)?;
    order_tasks(registry, &selection)
}
