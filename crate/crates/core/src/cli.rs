//! Command-line front end. `main.rs` only forwards to [`run`].
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage or configuration error |
//! | 3 | I/O error |
//! | 4 | stage 1 (identification) failed |
//! | 5 | stage 2 (task planning or extraction) failed |
//! | 6 | stage 3 (assembly) failed |
//! | 7 | solver error or node limit reached |
//! | 8 | LP file does not parse |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::assemble::{fmt_num, AssembleOptions};
use crate::eval::{self, EvalConfig, EvalError, Instance};
use crate::graph::{bundled_graph, load_graph, ModellingGraph, ProblemType};
use crate::llm::{BackendMode, ChatBackend, GatewayConfig, LlmError};
use crate::pipeline::{Pipeline, Stage, DEFAULT_MODEL_ID};
use crate::registry::{bundled_registry, load_registry, plan_for_nodes, TaskRegistry};
use crate::solver::{parse_lp, solve_milp_with, SolveStatus, SolverOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_STAGE1: u8 = 4;
pub const EXIT_STAGE2: u8 = 5;
pub const EXIT_STAGE3: u8 = 6;
pub const EXIT_SOLVE: u8 = 7;
pub const EXIT_LP_PARSE: u8 = 8;

#[derive(Debug, Parser)]
#[command(name = "roster-milp", version, about = "Formulate and solve workforce scheduling problems as MILP models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline on one instance and write model.tex, model.lp and the audit bundle.
    Formulate(FormulateArgs),
    /// Solve an LP file with the embedded branch-and-bound solver.
    Solve(SolveArgs),
    /// Run every instance of a dataset for several trials and write a report.
    Eval(EvalArgs),
    /// Print the extraction plan for a set of graph nodes without calling a model.
    Plan(PlanArgs),
    /// Record a model-accuracy verdict for one instance.
    Ma(MaArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// `shift`, `days-off`, or a path to a graph JSON file.
    #[arg(long)]
    pub graph: Option<String>,
    /// Registry JSON file; defaults to the bundled registry of the graph's problem type.
    #[arg(long)]
    pub registry: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    #[arg(long, default_value = "replay", value_parser = ["live", "record", "replay"])]
    pub backend: String,
    #[arg(long, default_value = DEFAULT_MODEL_ID)]
    pub model_id: String,
    /// Fixture directory. Defaults to the instance's `fixtures/`.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Chat-completions endpoint for live and record modes.
    #[arg(long)]
    pub endpoint: Option<String>,
}

#[derive(Debug, Args)]
pub struct FormulateArgs {
    /// Instance directory (description.md, meta.json) or a description file.
    pub instance: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the extracted maximum number of overtime periods.
    #[arg(long)]
    pub max_overtime: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = SolverOptions::default().node_limit)]
    pub node_limit: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Registry override for shift-scheduling instances.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long, default_value = "eval-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Activated node names.
    pub nodes: Vec<String>,
}

#[derive(Debug, Args)]
pub struct MaArgs {
    pub dataset: PathBuf,
    pub id: String,
    #[arg(long, action = clap::ArgAction::Set)]
    pub verdict: bool,
    #[arg(long)]
    pub notes: Option<String>,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn llm_failure(e: LlmError) -> Failure {
    let code = match e {
        LlmError::Config(_) => EXIT_USAGE,
        _ => EXIT_STAGE1,
    };
    Failure::new(code, e.to_string())
}

fn eval_failure(e: EvalError) -> Failure {
    let code = match e {
        EvalError::Io { .. } => EXIT_IO,
        _ => EXIT_USAGE,
    };
    Failure::new(code, e.to_string())
}

/// Parses `args` and runs the command, printing results to stdout and
/// diagnostics to stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::from(EXIT_OK)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Runs a parsed command and returns what it would print on success.
pub fn execute(command: Command) -> Result<String, Failure> {
    match command {
        Command::Formulate(a) => formulate(&a),
        Command::Solve(a) => solve(&a),
        Command::Eval(a) => evaluate(&a),
        Command::Plan(a) => plan(&a),
        Command::Ma(a) => record_ma(&a),
    }
}

fn resolve_graph(spec: Option<&str>, fallback: Option<ProblemType>) -> Result<ModellingGraph, Failure> {
    match spec {
        Some(s) => match s.parse::<ProblemType>() {
            Ok(pt) => Ok(bundled_graph(pt)),
            Err(_) if Path::new(s).exists() => load_graph(s).map_err(|e| Failure::new(EXIT_USAGE, e.to_string())),
            Err(_) => Err(Failure::new(
                EXIT_USAGE,
                format!("--graph `{s}` is neither `shift`, `days-off` nor an existing file"),
            )),
        },
        None => fallback
            .map(bundled_graph)
            .ok_or_else(|| Failure::new(EXIT_USAGE, "--graph is required when the instance has no meta.json")),
    }
}

fn resolve_registry(path: Option<&Path>, g: &ModellingGraph) -> Result<TaskRegistry, Failure> {
    let r = match path {
        Some(p) => load_registry(p, g),
        None => bundled_registry(g.problem_type, g),
    };
    r.map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
}

fn mode(name: &str) -> Result<BackendMode, Failure> {
    name.parse().map_err(|e: String| Failure::new(EXIT_USAGE, e))
}

fn gateway(b: &BackendArgs, fixture_dir: PathBuf) -> Result<GatewayConfig, Failure> {
    Ok(GatewayConfig {
        mode: mode(&b.backend)?,
        endpoint: b.endpoint.clone(),
        model_id: b.model_id.clone(),
        fixture_dir: Some(fixture_dir),
    })
}

/// The description text plus the instance metadata, when present.
fn read_instance(path: &Path) -> Result<(String, Option<Instance>), Failure> {
    if !path.exists() {
        return Err(Failure::new(EXIT_IO, format!("{}: no such file or directory", path.display())));
    }
    if path.is_dir() {
        if path.join(eval::META_FILE).is_file() {
            let inst = Instance::load(path).map_err(eval_failure)?;
            return Ok((inst.description.clone(), Some(inst)));
        }
        let desc = path.join(eval::DESCRIPTION_FILE);
        let text = fs::read_to_string(&desc).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", desc.display())))?;
        return Ok((text, None));
    }
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    Ok((text, None))
}

fn stage_code(stage: Stage) -> u8 {
    match stage {
        Stage::Identify => EXIT_STAGE1,
        Stage::Extract => EXIT_STAGE2,
        Stage::Assemble => EXIT_STAGE3,
    }
}

fn formulate(a: &FormulateArgs) -> Result<String, Failure> {
    let (description, instance) = read_instance(&a.instance)?;
    let graph = resolve_graph(a.graph.graph.as_deref(), instance.as_ref().map(|i| i.meta.problem_type))?;
    let registry = resolve_registry(a.graph.registry.as_deref(), &graph)?;
    let fixture_dir = match (&a.backend.fixtures, &instance) {
        (Some(dir), _) => dir.clone(),
        (None, Some(inst)) => inst.fixture_dir(),
        (None, None) if a.instance.is_dir() => a.instance.join(eval::FIXTURES_DIR),
        (None, None) => a.instance.with_extension("").join(eval::FIXTURES_DIR),
    };
    let backend = gateway(&a.backend, fixture_dir)?.build().map_err(llm_failure)?;
    let pipeline = Pipeline {
        graph,
        registry,
        model_id: a.backend.model_id.clone(),
        assemble: AssembleOptions { max_overtime_periods: a.max_overtime },
    };
    let run = pipeline.run(&description, backend.as_ref());
    run.write(&a.out).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.out.display())))?;
    match &run.outcome {
        Ok(f) => {
            let mut out = String::new();
            for w in &f.assembly.model.warnings {
                eprintln!("{w}");
            }
            let m = &f.assembly.model;
            writeln!(out, "Formulated {} variables and {} constraints.", m.vars.len(), m.row_count()).unwrap();
            writeln!(out, "Wrote {}", a.out.join("model.tex").display()).unwrap();
            writeln!(out, "Wrote {}", a.out.join("model.lp").display()).unwrap();
            Ok(out)
        }
        Err(e) => Err(Failure::new(stage_code(e.stage()), format!("{}: {e}", e.stage()))),
    }
}

fn solve(a: &SolveArgs) -> Result<String, Failure> {
    let text =
        fs::read_to_string(&a.model).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.model.display())))?;
    let sf = parse_lp(&text).map_err(|e| Failure::new(EXIT_LP_PARSE, format!("{}: {e}", a.model.display())))?;
    let r = solve_milp_with(&sf, &SolverOptions { node_limit: a.node_limit })
        .map_err(|e| Failure::new(EXIT_SOLVE, e.to_string()))?;
    let mut out = String::new();
    match r.status {
        SolveStatus::Optimal => {
            let obj = r.objective.expect("optimal result has an objective");
            writeln!(out, "Optimal objective value: {}", fmt_num(0.0 + obj)).unwrap();
            writeln!(out, "Variable values:").unwrap();
            for (name, v) in &r.assignment {
                if v.abs() > crate::solver::INT_TOL {
                    writeln!(out, "{name} = {}", fmt_num(0.0 + *v)).unwrap();
                }
            }
            Ok(out)
        }
        SolveStatus::Infeasible | SolveStatus::Unbounded => {
            eprintln!("solver status: {}", r.status);
            writeln!(out, "No optimal solution found.").unwrap();
            Ok(out)
        }
        SolveStatus::NodeLimit => {
            println!("No optimal solution found.");
            let bound = r.best_bound.map_or("none".to_string(), fmt_num);
            Err(Failure::new(
                EXIT_SOLVE,
                format!("node limit of {} reached after {} nodes (best bound {bound})", a.node_limit, r.nodes_explored),
            ))
        }
    }
}

fn evaluate(a: &EvalArgs) -> Result<String, Failure> {
    if a.trials == 0 {
        return Err(Failure::new(EXIT_USAGE, "--trials must be at least 1"));
    }
    let instances = eval::load_dataset(&a.dataset).map_err(eval_failure)?;
    if instances.is_empty() {
        return Err(eval_failure(EvalError::EmptyTotal));
    }
    let mut config = EvalConfig::bundled(&a.backend.model_id, a.trials);
    if let Some(path) = &a.registry {
        config.shift.registry = resolve_registry(Some(path), &config.shift.graph)?;
    }
    config.audit_dir = Some(a.out.join("audit"));
    let mode = mode(&a.backend.backend)?;
    let backend_args = a.backend.clone();
    let factory = move |inst: &Instance| -> Result<Box<dyn ChatBackend>, LlmError> {
        let dir = match &backend_args.fixtures {
            Some(root) => root.join(&inst.id),
            None => inst.fixture_dir(),
        };
        GatewayConfig {
            mode,
            endpoint: backend_args.endpoint.clone(),
            model_id: backend_args.model_id.clone(),
            fixture_dir: Some(dir),
        }
        .build()
    };
    let report = eval::run_trials(&instances, &config, &factory).map_err(eval_failure)?;
    report.write(&a.out).map_err(eval_failure)?;
    let mut out = report.to_markdown();
    writeln!(out, "\nWrote {}", a.out.join("report.md").display()).unwrap();
    Ok(out)
}

fn plan(a: &PlanArgs) -> Result<String, Failure> {
    let Some(spec) = a.graph.graph.as_deref() else {
        return Err(Failure::new(EXIT_USAGE, "plan needs --graph"));
    };
    let graph = resolve_graph(Some(spec), None)?;
    let registry = resolve_registry(a.graph.registry.as_deref(), &graph)?;
    for n in &a.nodes {
        if graph.node_by_name(n).is_none() {
            return Err(Failure::new(EXIT_USAGE, format!("unknown node `{n}` in the {} graph", graph.problem_type)));
        }
    }
    let plan = plan_for_nodes(&registry, &a.nodes.iter().cloned().collect())
        .map_err(|e| Failure::new(EXIT_STAGE2, e.to_string()))?;
    let mut out = String::new();
    if plan.is_empty() {
        writeln!(out, "(empty plan)").unwrap();
    }
    for (i, name) in plan.ordered_tasks.iter().enumerate() {
        let prereqs = &registry.get(name).expect("planned task is registered").prerequisites;
        if prereqs.is_empty() {
            writeln!(out, "{}. {name}", i + 1).unwrap();
        } else {
            writeln!(out, "{}. {name}  [after: {}]", i + 1, prereqs.join(", ")).unwrap();
        }
    }
    for (removed, by) in &plan.aliases {
        writeln!(out, "removed: {removed} (covered by {})", by.join(", ")).unwrap();
    }
    Ok(out)
}

fn record_ma(a: &MaArgs) -> Result<String, Failure> {
    let (ma, n) = eval::record_ma(&a.dataset, &a.id, a.verdict, a.notes.as_deref()).map_err(eval_failure)?;
    let ma = ma.map_or("not recorded".to_string(), |x| format!("{}%", fmt_num(0.0 + (x * 1000.0).round() / 10.0)));
    Ok(format!("Recorded {} for {}. MA: {ma} ({n} verdicts recorded).\n", a.verdict, a.id))
}
