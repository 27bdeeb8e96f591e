//! Stage 2: run the planned extraction tasks in order, threading each task's
//! prerequisite outputs into its prompt.

mod shape;

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::llm::{complete_structured, fixture_key, ChatBackend, ChatRequest, LlmError, RETRY_INSTRUCTION};
use crate::registry::{ExtractionTask, TaskPlan, TaskRegistry};

pub use shape::{Field, Shape};

const COMPLIANCE: &str = "Please ensure your response strictly follows the **Expected Output Format** \
provided above. Avoid including any code implementations. The response must include a **valid JSON \
object** containing only the requested information.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub key: String,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", content = "detail", rename_all = "kebab-case")]
pub enum Absence {
    /// The model answered with an empty value.
    Empty,
    /// Both attempts were unparseable or failed shape validation.
    Rejected(String),
    /// A prerequisite produced nothing, so the task was not run.
    PrerequisiteMissing(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionStore {
    /// Task name to parsed output, in execution order.
    pub entries: IndexMap<String, Value>,
    /// Removed generalised task to the specific task answering for it.
    pub aliases: BTreeMap<String, String>,
    pub provenance: BTreeMap<String, Provenance>,
    pub absent: BTreeMap<String, Absence>,
}

impl ExtractionStore {
    /// Output of `task`, following aliases.
    pub fn get(&self, task: &str) -> Option<&Value> {
        self.entries.get(task).or_else(|| self.aliases.get(task).and_then(|t| self.entries.get(t)))
    }

    /// The `value` field of a task's output.
    pub fn value(&self, task: &str) -> Option<&Value> {
        self.get(task).and_then(|v| v.get("value"))
    }

    pub fn contains(&self, task: &str) -> bool {
        self.get(task).is_some()
    }

    /// Whether `task` (or every task standing in for it) has run.
    fn settled(&self, task: &str, plan: &TaskPlan) -> bool {
        let ran = |t: &str| self.entries.contains_key(t) || self.absent.contains_key(t);
        match plan.aliases.get(task) {
            Some(children) => children.iter().all(|c| ran(c)),
            None => ran(task),
        }
    }

    pub fn to_json(&self) -> String {
        to_json_4(&serde_json::to_value(self).expect("store serializes"))
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("task `{task}` scheduled before its prerequisite `{prerequisite}` (planner bug)")]
    Sequencing { task: String, prerequisite: String },
    #[error("task `{0}` is not in the registry")]
    UnknownTask(String),
    #[error("invalid output format template for task `{task}`: {message}")]
    Template { task: String, message: String },
    #[error("required task `{task}` produced no usable output: {reason}")]
    RequiredTaskFailed { task: String, reason: String },
    #[error("task `{task}`: {source}")]
    Llm {
        task: String,
        #[source]
        source: LlmError,
    },
}

/// JSON with four-space indentation, as used for Known Information.
pub fn to_json_4(v: &Value) -> String {
    let mut buf = Vec::new();
    let fmt = serde_json::ser::PrettyFormatter::with_indent(b"    ");
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    v.serialize(&mut ser).expect("value serializes");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Known Information for `task`: direct prerequisites in declaration order.
pub fn known_information(task: &ExtractionTask, store: &ExtractionStore) -> Result<Value, ExtractError> {
    let mut known = Map::new();
    for prerequisite in &task.prerequisites {
        let value = store
            .get(prerequisite)
            .ok_or_else(|| ExtractError::Sequencing { task: task.name.clone(), prerequisite: prerequisite.clone() })?;
        known.insert(prerequisite.clone(), value.clone());
    }
    Ok(Value::Object(known))
}

pub fn build_task_prompt(
    task: &ExtractionTask,
    store: &ExtractionStore,
    description: &str,
    model_id: &str,
) -> Result<ChatRequest, ExtractError> {
    let known = known_information(task, store)?;
    let user = format!(
        "### Task Name\n{}\n\n### Task Description\n{}\n\n### Expected Output Format\n{}\n\n{}\n\n### Known Information\n{}\n### Problem Description\n{}",
        task.name,
        task.description.trim_end(),
        task.output_schema.trim_end(),
        COMPLIANCE,
        to_json_4(&known),
        description.trim_end(),
    );
    Ok(ChatRequest::new(model_id, None, user))
}

/// `value` is null, an empty list or an empty object.
fn is_empty_value(v: &Value) -> bool {
    match v.get("value") {
        None | Some(Value::Null) => v.as_object().is_some_and(|m| m.len() <= 1),
        Some(Value::Array(a)) => a.is_empty(),
        Some(Value::Object(o)) => o.is_empty(),
        Some(_) => false,
    }
}

enum Outcome {
    Stored(Value),
    Empty,
}

/// Executes `plan` in order. Tasks whose output is unusable are recorded as
/// absent; a fixture miss or transport failure aborts the run.
pub fn run_extraction(
    registry: &TaskRegistry,
    plan: &TaskPlan,
    description: &str,
    backend: &dyn ChatBackend,
    model_id: &str,
) -> Result<ExtractionStore, ExtractError> {
    let mut store = ExtractionStore::default();
    for name in &plan.ordered_tasks {
        let task = registry.get(name).ok_or_else(|| ExtractError::UnknownTask(name.clone()))?;
        let shape = Shape::parse(&task.output_schema)
            .map_err(|message| ExtractError::Template { task: name.clone(), message })?;

        if let Some(p) = task.prerequisites.iter().find(|p| !store.settled(p, plan)) {
            return Err(ExtractError::Sequencing { task: name.clone(), prerequisite: p.clone() });
        }
        if let Some(p) = task.prerequisites.iter().find(|p| !store.contains(p)) {
            log::warn!("skipping `{name}`: prerequisite `{p}` has no output");
            store.absent.insert(name.clone(), Absence::PrerequisiteMissing(p.clone()));
            continue;
        }

        let req = build_task_prompt(task, &store, description, model_id)?;
        let result = complete_structured(backend, &req, |v| {
            if is_empty_value(&v) {
                return Ok(Outcome::Empty);
            }
            shape.validate(&v)?;
            Ok(Outcome::Stored(v))
        });
        match result {
            Ok(done) => {
                store.provenance.insert(name.clone(), Provenance { key: done.key, attempts: done.attempts });
                match done.value {
                    Outcome::Stored(v) => {
                        store.entries.insert(name.clone(), v);
                    }
                    Outcome::Empty => {
                        log::warn!("task `{name}` returned no information");
                        store.absent.insert(name.clone(), Absence::Empty);
                    }
                }
            }
            Err(LlmError::Rejected { reason, attempts, .. }) => {
                log::warn!("task `{name}` failed: {reason}");
                store.provenance.insert(
                    name.clone(),
                    Provenance { key: fixture_key(&req.with_appended(RETRY_INSTRUCTION)), attempts },
                );
                store.absent.insert(name.clone(), Absence::Rejected(reason));
            }
            Err(source) => return Err(ExtractError::Llm { task: name.clone(), source }),
        }
        register_aliases(&mut store, plan, name);
    }
    Ok(store)
}

fn register_aliases(store: &mut ExtractionStore, plan: &TaskPlan, done: &str) {
    if !store.entries.contains_key(done) {
        return;
    }
    for (parent, children) in &plan.aliases {
        if children.iter().any(|c| c == done) && !store.aliases.contains_key(parent) {
            store.aliases.insert(parent.clone(), done.to_string());
        }
    }
}

/// Fails if any of `required` that is part of the plan has no output.
pub fn check_required(
    store: &ExtractionStore,
    plan: &TaskPlan,
    required: &BTreeSet<String>,
) -> Result<(), ExtractError> {
    for task in &plan.ordered_tasks {
        if required.contains(task) && !store.contains(task) {
            let reason = match store.absent.get(task) {
                Some(Absence::Empty) => "empty answer".to_string(),
                Some(Absence::Rejected(r)) => r.clone(),
                Some(Absence::PrerequisiteMissing(p)) => format!("prerequisite `{p}` missing"),
                None => "not executed".to_string(),
            };
            return Err(ExtractError::RequiredTaskFailed { task: task.clone(), reason });
        }
    }
    Ok(())
}
