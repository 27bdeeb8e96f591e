//! Identification, task planning, extraction and assembly in one run.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::assemble::{self, build_model, render_latex, render_lp, AssembleError, AssembleOptions, Assembly};
use crate::extract::{check_required, run_extraction, ExtractError, ExtractionStore};
use crate::graph::{ModellingGraph, ProblemType};
use crate::identify::{run_identification, ActivationReport, IdentifyError};
use crate::llm::ChatBackend;
use crate::registry::{plan_for_nodes, RegistryError, TaskPlan, TaskRegistry};

pub const DEFAULT_MODEL_ID: &str = "gpt-4o-2024-08-06";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Identify,
    Extract,
    Assemble,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Identify => "stage 1 (identification)",
            Stage::Extract => "stage 2 (extraction)",
            Stage::Assemble => "stage 3 (assembly)",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error("task planning: {0}")]
    Plan(#[from] RegistryError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Identify(_) => Stage::Identify,
            PipelineError::Plan(_) | PipelineError::Extract(_) => Stage::Extract,
            PipelineError::Assemble(_) => Stage::Assemble,
        }
    }

    /// True when the failure came from the LLM backend rather than the data.
    pub fn is_fixture_miss(&self) -> bool {
        use crate::llm::LlmError;
        matches!(
            self,
            PipelineError::Identify(IdentifyError::Llm(LlmError::FixtureMiss { .. }))
                | PipelineError::Extract(ExtractError::Llm { source: LlmError::FixtureMiss { .. }, .. })
        )
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub graph: ModellingGraph,
    pub registry: TaskRegistry,
    pub model_id: String,
    pub assemble: AssembleOptions,
}

impl Pipeline {
    pub fn bundled(problem_type: ProblemType, model_id: impl Into<String>) -> Self {
        let graph = crate::graph::bundled_graph(problem_type);
        let registry =
            crate::registry::bundled_registry(problem_type, &graph).expect("bundled registry matches its graph");
        Pipeline { graph, registry, model_id: model_id.into(), assemble: AssembleOptions::default() }
    }

    pub fn problem_type(&self) -> ProblemType {
        self.graph.problem_type
    }

    /// Runs every stage, keeping whatever intermediate results were reached.
    pub fn run(&self, description: &str, backend: &dyn ChatBackend) -> Run {
        let mut run = Run::default();
        run.outcome = self.stages(description, backend, &mut run);
        run
    }

    fn stages(
        &self,
        description: &str,
        backend: &dyn ChatBackend,
        run: &mut Run,
    ) -> Result<Formulation, PipelineError> {
        let report = run_identification(&self.graph, description, backend, &self.model_id)?;
        run.activation = Some(report.clone());
        let plan = plan_for_nodes(&self.registry, &report.activated_nodes)?;
        run.plan = Some(plan.clone());
        let store = run_extraction(&self.registry, &plan, description, backend, &self.model_id)?;
        run.store = Some(store.clone());
        check_required(&store, &plan, &required_tasks())?;
        let assembly = build_model(&self.graph, &store, &report, &self.assemble)?;
        Ok(Formulation { latex: render_latex(&assembly.model), lp: render_lp(&assembly.model), assembly })
    }
}

/// Tasks without which no model can be assembled.
pub fn required_tasks() -> BTreeSet<String> {
    [
        assemble::TASK_DEMAND_SHIFT,
        assemble::TASK_DEMAND_DAYS,
        "set of periods",
        "set of shifts",
        "set of workload-specific shifts",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

#[derive(Debug, Clone)]
pub struct Formulation {
    pub assembly: Assembly,
    pub latex: String,
    pub lp: String,
}

#[derive(Debug)]
pub struct Run {
    pub activation: Option<ActivationReport>,
    pub plan: Option<TaskPlan>,
    pub store: Option<ExtractionStore>,
    pub outcome: Result<Formulation, PipelineError>,
}

impl Default for Run {
    fn default() -> Self {
        Run {
            activation: None,
            plan: None,
            store: None,
            outcome: Err(PipelineError::Identify(IdentifyError::EmptyDescription)),
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

impl Run {
    /// Writes the audit bundle and, on success, `model.tex`, `model.lp` and
    /// `model.json`. Stale files from an earlier run are removed.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let files: [(&str, Option<String>); 7] = [
            ("activation.json", self.activation.as_ref().map(pretty)),
            ("plan.json", self.plan.as_ref().map(pretty)),
            ("store.json", self.store.as_ref().map(|s| s.to_json() + "\n")),
            ("model.tex", self.outcome.as_ref().ok().map(|f| f.latex.clone())),
            ("model.lp", self.outcome.as_ref().ok().map(|f| f.lp.clone())),
            ("model.json", self.outcome.as_ref().ok().map(|f| pretty(&f.assembly.model))),
            ("error.txt", self.outcome.as_ref().err().map(|e| format!("{}: {e}\n", e.stage()))),
        ];
        for (name, content) in files {
            let path = dir.join(name);
            match content {
                Some(text) => fs::write(&path, text)?,
                None if path.exists() => fs::remove_file(&path)?,
                None => {}
            }
        }
        Ok(())
    }
}
