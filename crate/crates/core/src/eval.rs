//! Benchmark harness: trials, execution accuracy, model accuracy, reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assemble::fmt_num;
use crate::graph::ProblemType;
use crate::llm::{ChatBackend, LlmError};
use crate::pipeline::{Pipeline, Run};
use crate::solver::{solve_model, SolveStatus};

pub const META_FILE: &str = "meta.json";
pub const DESCRIPTION_FILE: &str = "description.md";
pub const REFERENCE_MODEL_FILE: &str = "reference_model.tex";
pub const FIXTURES_DIR: &str = "fixtures";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: invalid instance: {message}")]
    Instance { path: String, message: String },
    #[error("execution accuracy needs at least one instance")]
    EmptyTotal,
    #[error("{matches} matches out of {total} instances")]
    MatchesExceedTotal { matches: usize, total: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("no instance `{0}` in the dataset")]
    UnknownInstance(String),
}

fn io(path: &Path, e: impl std::fmt::Display) -> EvalError {
    EvalError::Io { path: path.display().to_string(), message: e.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub problem_type: ProblemType,
    #[serde(default)]
    pub reference_optimum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ma_verdict: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ma_notes: Option<String>,
    /// Where the instance came from, e.g. whether it is synthetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub dir: PathBuf,
    pub description: String,
    pub meta: InstanceMeta,
    pub reference_model: Option<String>,
}

impl Instance {
    pub fn load(dir: &Path) -> Result<Instance, EvalError> {
        let id = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| EvalError::Instance {
                path: dir.display().to_string(),
                message: "directory name is not valid UTF-8".into(),
            })?
            .to_string();
        let desc_path = dir.join(DESCRIPTION_FILE);
        let description = fs::read_to_string(&desc_path).map_err(|e| io(&desc_path, e))?;
        let invalid = |message: String| EvalError::Instance { path: dir.display().to_string(), message };
        if description.trim().is_empty() {
            return Err(invalid("description.md is empty".into()));
        }
        let meta_path = dir.join(META_FILE);
        let meta_text = fs::read_to_string(&meta_path).map_err(|e| io(&meta_path, e))?;
        let meta: InstanceMeta = serde_json::from_str(&meta_text).map_err(|e| invalid(format!("meta.json: {e}")))?;
        if meta.reference_optimum.is_some_and(|r| !r.is_finite()) {
            return Err(invalid("reference_optimum is not finite".into()));
        }
        let ref_path = dir.join(REFERENCE_MODEL_FILE);
        let reference_model =
            if ref_path.is_file() { Some(fs::read_to_string(&ref_path).map_err(|e| io(&ref_path, e))?) } else { None };
        Ok(Instance { id, dir: dir.to_path_buf(), description, meta, reference_model })
    }

    pub fn fixture_dir(&self) -> PathBuf {
        self.dir.join(FIXTURES_DIR)
    }
}

/// Every subdirectory holding a `meta.json`, sorted by id.
pub fn load_dataset(dir: &Path) -> Result<Vec<Instance>, EvalError> {
    let entries = fs::read_dir(dir).map_err(|e| io(dir, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io(dir, e))?.path();
        if path.is_dir() && path.join(META_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    dirs.iter().map(|d| Instance::load(d)).collect()
}

pub fn compute_ea(matches: usize, total: usize) -> Result<f64, EvalError> {
    if total == 0 {
        return Err(EvalError::EmptyTotal);
    }
    if matches > total {
        return Err(EvalError::MatchesExceedTotal { matches, total });
    }
    Ok(matches as f64 / total as f64)
}

/// Optimum comparison: absolute tolerance scaled by the reference magnitude.
pub fn optimum_matches(computed: f64, reference: f64) -> bool {
    (computed - reference).abs() <= 1e-6 * reference.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Match,
    Mismatch,
    Failed,
    /// Solved, but the instance has no reference optimum.
    Unscored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub status: TrialStatus,
    #[serde(default)]
    pub computed_optimum: Option<f64>,
    #[serde(default)]
    pub solve_status: Option<SolveStatus>,
    /// `stage 1`, `stage 2`, `stage 3` or `solve`.
    #[serde(default)]
    pub failure_stage: Option<String>,
    #[serde(default)]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub id: String,
    pub problem_type: ProblemType,
    pub reference_optimum: Option<f64>,
    pub trials: Vec<TrialOutcome>,
    #[serde(default)]
    pub ma_verdict: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub model_id: String,
    pub trials: usize,
    pub instances: Vec<InstanceReport>,
    /// Over the instances with a reference optimum.
    pub scored_instances: usize,
    pub ea_per_trial: Vec<f64>,
    pub ea_average: f64,
    #[serde(default)]
    pub ma: Option<f64>,
    pub ma_recorded: usize,
}

/// Builds the chat backend for one instance.
pub trait BackendFactory: Sync {
    fn backend(&self, instance: &Instance) -> Result<Box<dyn ChatBackend>, LlmError>;
}

impl<F> BackendFactory for F
where
    F: Fn(&Instance) -> Result<Box<dyn ChatBackend>, LlmError> + Sync,
{
    fn backend(&self, instance: &Instance) -> Result<Box<dyn ChatBackend>, LlmError> {
        self(instance)
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub trials: usize,
    pub shift: Pipeline,
    pub days_off: Pipeline,
    /// When set, each instance's audit bundle is written under `<dir>/<id>/trial-<k>`.
    pub audit_dir: Option<PathBuf>,
}

impl EvalConfig {
    pub fn bundled(model_id: &str, trials: usize) -> Self {
        EvalConfig {
            trials,
            shift: Pipeline::bundled(ProblemType::ShiftScheduling, model_id),
            days_off: Pipeline::bundled(ProblemType::DaysOffScheduling, model_id),
            audit_dir: None,
        }
    }

    fn pipeline(&self, pt: ProblemType) -> &Pipeline {
        match pt {
            ProblemType::ShiftScheduling => &self.shift,
            ProblemType::DaysOffScheduling => &self.days_off,
        }
    }
}

fn failed(trial: usize, stage: &str, message: String) -> TrialOutcome {
    TrialOutcome {
        trial,
        status: TrialStatus::Failed,
        computed_optimum: None,
        solve_status: None,
        failure_stage: Some(stage.to_string()),
        message: Some(message),
    }
}

fn stage_label(run: &Run) -> Option<(String, String)> {
    let e = run.outcome.as_ref().err()?;
    let label = match e.stage() {
        crate::pipeline::Stage::Identify => "stage 1",
        crate::pipeline::Stage::Extract => "stage 2",
        crate::pipeline::Stage::Assemble => "stage 3",
    };
    Some((label.to_string(), e.to_string()))
}

/// One pipeline execution plus solve; never panics the batch on failure.
pub fn run_trial(config: &EvalConfig, factory: &dyn BackendFactory, instance: &Instance, trial: usize) -> TrialOutcome {
    let backend = match factory.backend(instance) {
        Ok(b) => b,
        Err(e) => return failed(trial, "stage 1", format!("backend: {e}")),
    };
    let pipeline = config.pipeline(instance.meta.problem_type);
    let run = pipeline.run(&instance.description, backend.as_ref());
    if let Some(dir) = &config.audit_dir {
        let target = dir.join(&instance.id).join(format!("trial-{trial}"));
        if let Err(e) = run.write(&target) {
            log::warn!("cannot write audit bundle {}: {e}", target.display());
        }
    }
    if let Some((stage, message)) = stage_label(&run) {
        return failed(trial, &stage, message);
    }
    let formulation = run.outcome.expect("checked above");
    let solved = match solve_model(&formulation.assembly.model) {
        Ok(r) => r,
        Err(e) => return failed(trial, "solve", e.to_string()),
    };
    let computed = solved.objective.filter(|_| solved.is_optimal());
    let status = match (computed, instance.meta.reference_optimum) {
        (Some(c), Some(r)) if optimum_matches(c, r) => TrialStatus::Match,
        (_, Some(_)) => TrialStatus::Mismatch,
        (_, None) => TrialStatus::Unscored,
    };
    TrialOutcome {
        trial,
        status,
        computed_optimum: computed,
        solve_status: Some(solved.status),
        failure_stage: None,
        message: None,
    }
}

pub fn run_trials(
    instances: &[Instance],
    config: &EvalConfig,
    factory: &dyn BackendFactory,
) -> Result<TrialReport, EvalError> {
    if config.trials == 0 {
        return Err(EvalError::NoTrials);
    }
    let scored = instances.iter().filter(|i| i.meta.reference_optimum.is_some()).count();
    if scored == 0 {
        return Err(EvalError::EmptyTotal);
    }
    let jobs: Vec<(usize, usize)> =
        (0..instances.len()).flat_map(|i| (1..=config.trials).map(move |t| (i, t))).collect();
    let outcomes: Vec<TrialOutcome> =
        jobs.par_iter().map(|&(i, t)| run_trial(config, factory, &instances[i], t)).collect();
    let mut reports: Vec<InstanceReport> = instances
        .iter()
        .map(|inst| InstanceReport {
            id: inst.id.clone(),
            problem_type: inst.meta.problem_type,
            reference_optimum: inst.meta.reference_optimum,
            trials: Vec::with_capacity(config.trials),
            ma_verdict: inst.meta.ma_verdict,
        })
        .collect();
    for (&(i, _), outcome) in jobs.iter().zip(outcomes) {
        reports[i].trials.push(outcome);
    }
    let ea_per_trial = (0..config.trials)
        .map(|t| {
            let matches = reports.iter().filter(|r| r.trials[t].status == TrialStatus::Match).count();
            compute_ea(matches, scored)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let ea_average = ea_per_trial.iter().sum::<f64>() / config.trials as f64;
    let (ma, ma_recorded) = model_accuracy(instances.iter().map(|i| i.meta.ma_verdict));
    Ok(TrialReport {
        model_id: config.shift.model_id.clone(),
        trials: config.trials,
        instances: reports,
        scored_instances: scored,
        ea_per_trial,
        ea_average,
        ma,
        ma_recorded,
    })
}

/// Share of recorded verdicts that are positive, with the count recorded.
pub fn model_accuracy(verdicts: impl IntoIterator<Item = Option<bool>>) -> (Option<f64>, usize) {
    let recorded: Vec<bool> = verdicts.into_iter().flatten().collect();
    let positive = recorded.iter().filter(|&&v| v).count();
    (compute_ea(positive, recorded.len()).ok(), recorded.len())
}

/// Persists a verdict in the instance's meta file and returns the dataset MA.
pub fn record_ma(
    dataset: &Path,
    id: &str,
    verdict: bool,
    notes: Option<&str>,
) -> Result<(Option<f64>, usize), EvalError> {
    let mut instances = load_dataset(dataset)?;
    let inst = instances.iter_mut().find(|i| i.id == id).ok_or_else(|| EvalError::UnknownInstance(id.to_string()))?;
    inst.meta.ma_verdict = Some(verdict);
    inst.meta.ma_notes = notes.map(str::to_string);
    let path = inst.dir.join(META_FILE);
    let mut text = serde_json::to_string_pretty(&inst.meta).expect("serializable");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(model_accuracy(instances.iter().map(|i| i.meta.ma_verdict)))
}

fn percent(x: f64) -> String {
    format!("{}%", fmt_num((x * 1000.0).round() / 10.0))
}

impl TrialReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# Evaluation report\n").unwrap();
        writeln!(
            out,
            "Model: `{}`. Trials: {}. Scored instances: {}.\n",
            self.model_id, self.trials, self.scored_instances
        )
        .unwrap();
        let trial_cols: Vec<String> = (1..=self.trials).map(|t| format!("Trial {t}")).collect();
        writeln!(out, "| Instance | Type | Reference | {} |", trial_cols.join(" | ")).unwrap();
        writeln!(out, "|---|---|---|{}", "---|".repeat(self.trials)).unwrap();
        for r in &self.instances {
            let cells: Vec<String> = r
                .trials
                .iter()
                .map(|t| match (&t.status, t.computed_optimum) {
                    (TrialStatus::Match, Some(v)) => format!("match ({})", fmt_num(v)),
                    (TrialStatus::Mismatch, Some(v)) => format!("mismatch ({})", fmt_num(v)),
                    (TrialStatus::Unscored, Some(v)) => format!("unscored ({})", fmt_num(v)),
                    (_, _) => match (&t.failure_stage, t.solve_status) {
                        (Some(stage), _) => format!("failed: {stage}"),
                        (None, Some(s)) => s.to_string(),
                        (None, None) => "failed".into(),
                    },
                })
                .collect();
            let reference = r.reference_optimum.map_or("-".to_string(), fmt_num);
            writeln!(out, "| {} | {} | {} | {} |", r.id, r.problem_type, reference, cells.join(" | ")).unwrap();
        }
        writeln!(out).unwrap();
        let eas: Vec<String> = self.ea_per_trial.iter().map(|&x| percent(x)).collect();
        writeln!(out, "| Metric | {} | Average |", trial_cols.join(" | ")).unwrap();
        writeln!(out, "|---|{}---|", "---|".repeat(self.trials)).unwrap();
        writeln!(out, "| EA | {} | {} |", eas.join(" | "), percent(self.ea_average)).unwrap();
        let ma = self.ma.map_or("not recorded".to_string(), percent);
        writeln!(out, "\nMA: {ma} ({} verdicts recorded).", self.ma_recorded).unwrap();
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), EvalError> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (name, text) in [("report.json", self.to_json()), ("report.md", self.to_markdown())] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}
