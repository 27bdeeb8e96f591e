//! C interface to roster-milp.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `rm_*_free`. Every fallible function returns an `RmStatus`
//! and writes its result through an out-pointer; on failure the message is
//! available from `rm_last_error` on the same thread. Strings written
//! through out-pointers are owned by the caller and released with
//! `rm_string_free`; strings returned directly are borrowed from a handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use roster_milp::assemble::AssembleOptions;
use roster_milp::eval::compute_ea;
use roster_milp::graph::{bundled_graph, load_graph, validate_graph, GraphError, ModellingGraph, ProblemType};
use roster_milp::llm::GatewayConfig;
use roster_milp::pipeline::{Formulation, Pipeline, Stage};
use roster_milp::registry::bundled_registry;
use roster_milp::solver::{parse_lp, solve_milp_with, SolveResult, SolveStatus, SolverOptions, StandardForm};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    Identify = 6,
    Extract = 7,
    Assemble = 8,
    Solver = 9,
    Config = 10,
    NotAvailable = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmSolveStatus {
    Optimal = 0,
    Infeasible = 1,
    Unbounded = 2,
    NodeLimit = 3,
}

/// A modelling graph.
pub struct RmGraph {
    inner: ModellingGraph,
}

/// A formulated model with its LaTeX and LP renderings.
pub struct RmModel {
    inner: Formulation,
}

/// Solver outcome with the variable assignment in model order.
pub struct RmSolveResult {
    inner: SolveResult,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(RmStatus, String);

type Outcome<T> = Result<T, Failure>;

fn fail<T>(status: RmStatus, msg: impl Into<String>) -> Outcome<T> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Outcome<()>) -> RmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            RmStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return fail(RmStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(RmStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    p.as_ref().map_or_else(|| fail(RmStatus::NullArgument, format!("{what} is null")), Ok)
}

unsafe fn put<T>(out: *mut T, value: T) -> Outcome<()> {
    if out.is_null() {
        return fail(RmStatus::NullArgument, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: &str) -> Outcome<*mut c_char> {
    CString::new(s).map(CString::into_raw).or_else(|_| fail(RmStatus::InvalidArgument, "string contains NUL"))
}

/// Message of the last failure on this thread. The pointer stays valid
/// until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn rm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Bundled graph for `problem_type` (`"shift"` or `"days-off"`, or the long names).
///
/// # Safety
/// `problem_type` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_graph_bundled(problem_type: *const c_char, out: *mut *mut RmGraph) -> RmStatus {
    guard(|| {
        let name = text(problem_type, "problem_type")?;
        let pt = name.parse::<ProblemType>().or_else(|e| fail(RmStatus::InvalidArgument, e.to_string()))?;
        put(out, Box::into_raw(Box::new(RmGraph { inner: bundled_graph(pt) })))
    })
}

/// Loads and validates a graph file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_graph_load(path: *const c_char, out: *mut *mut RmGraph) -> RmStatus {
    guard(|| {
        let path = text(path, "path")?;
        let g = load_graph(path).or_else(|e| {
            let status = if matches!(e, GraphError::Io { .. }) { RmStatus::Io } else { RmStatus::Parse };
            fail(status, e.to_string())
        })?;
        let report = validate_graph(&g);
        if !report.is_valid() {
            return fail(RmStatus::Parse, report.to_string());
        }
        put(out, Box::into_raw(Box::new(RmGraph { inner: g })))
    })
}

/// Number of nodes in the graph, 0 for a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rm_graph_node_count(graph: *const RmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.nodes.len())
}

/// # Safety
/// `graph` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn rm_graph_free(graph: *mut RmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

fn stage_status(stage: Stage) -> RmStatus {
    match stage {
        Stage::Identify => RmStatus::Identify,
        Stage::Extract => RmStatus::Extract,
        Stage::Assemble => RmStatus::Assemble,
    }
}

/// Formulates `description` with the bundled task registry, replaying LLM
/// responses for `model_id` from `fixture_dir`. `max_overtime` below 0
/// keeps the extracted value.
///
/// # Safety
/// String arguments must be NUL-terminated; `graph` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_formulate_replay(
    graph: *const RmGraph,
    description: *const c_char,
    model_id: *const c_char,
    fixture_dir: *const c_char,
    max_overtime: i32,
    out: *mut *mut RmModel,
) -> RmStatus {
    guard(|| {
        let graph = handle(graph, "graph")?.inner.clone();
        let description = text(description, "description")?;
        let model_id = text(model_id, "model_id")?;
        let dir = PathBuf::from(text(fixture_dir, "fixture_dir")?);
        let registry =
            bundled_registry(graph.problem_type, &graph).or_else(|e| fail(RmStatus::Config, e.to_string()))?;
        let backend =
            GatewayConfig::replay(model_id, dir).build().or_else(|e| fail(RmStatus::Config, e.to_string()))?;
        let pipeline = Pipeline {
            graph,
            registry,
            model_id: model_id.to_string(),
            assemble: AssembleOptions { max_overtime_periods: u32::try_from(max_overtime).ok() },
        };
        let f = pipeline
            .run(description, backend.as_ref())
            .outcome
            .or_else(|e| fail(stage_status(e.stage()), format!("{}: {e}", e.stage())))?;
        put(out, Box::into_raw(Box::new(RmModel { inner: f })))
    })
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rm_model_var_count(model: *const RmModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.assembly.model.vars.len())
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rm_model_row_count(model: *const RmModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.assembly.model.row_count())
}

/// LaTeX document for the model, freed with `rm_string_free`.
///
/// # Safety
/// `model` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_model_latex(model: *const RmModel, out: *mut *mut c_char) -> RmStatus {
    guard(|| put(out, owned_string(&handle(model, "model")?.inner.latex)?))
}

/// LP-format text for the model, freed with `rm_string_free`.
///
/// # Safety
/// `model` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_model_lp(model: *const RmModel, out: *mut *mut c_char) -> RmStatus {
    guard(|| put(out, owned_string(&handle(model, "model")?.inner.lp)?))
}

/// # Safety
/// `model` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn rm_model_free(model: *mut RmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

fn solve(sf: &StandardForm, node_limit: usize) -> Outcome<*mut RmSolveResult> {
    let opts = if node_limit == 0 { SolverOptions::default() } else { SolverOptions { node_limit } };
    let r = solve_milp_with(sf, &opts).or_else(|e| fail(RmStatus::Solver, e.to_string()))?;
    let names = sf.names.iter().map(|n| CString::new(n.as_str()).unwrap_or_default()).collect();
    Ok(Box::into_raw(Box::new(RmSolveResult { inner: r, names })))
}

/// Solves the model. `node_limit` 0 uses the default limit.
///
/// # Safety
/// `model` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_model_solve(
    model: *const RmModel,
    node_limit: usize,
    out: *mut *mut RmSolveResult,
) -> RmStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let r = solve(&StandardForm::from_model(&m.inner.assembly.model), node_limit)?;
        put(out, r)
    })
}

/// Parses and solves an LP-format model. `node_limit` 0 uses the default limit.
///
/// # Safety
/// `lp_text` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_lp_solve(
    lp_text: *const c_char,
    node_limit: usize,
    out: *mut *mut RmSolveResult,
) -> RmStatus {
    guard(|| {
        let sf = parse_lp(text(lp_text, "lp_text")?).or_else(|e| fail(RmStatus::Parse, e.to_string()))?;
        put(out, solve(&sf, node_limit)?)
    })
}

/// # Safety
/// `result` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_result_status(result: *const RmSolveResult, out: *mut RmSolveStatus) -> RmStatus {
    guard(|| {
        let status = match handle(result, "result")?.inner.status {
            SolveStatus::Optimal => RmSolveStatus::Optimal,
            SolveStatus::Infeasible => RmSolveStatus::Infeasible,
            SolveStatus::Unbounded => RmSolveStatus::Unbounded,
            SolveStatus::NodeLimit => RmSolveStatus::NodeLimit,
        };
        put(out, status)
    })
}

/// Objective of the returned assignment; `NotAvailable` when there is none.
///
/// # Safety
/// `result` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_result_objective(result: *const RmSolveResult, out: *mut f64) -> RmStatus {
    guard(|| match handle(result, "result")?.inner.objective {
        Some(v) => put(out, v),
        None => fail(RmStatus::NotAvailable, "no assignment was found"),
    })
}

/// Number of variables, 0 for a null handle.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rm_result_var_count(result: *const RmSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.names.len())
}

/// Name of variable `index`, borrowed from the result.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rm_result_var_name(result: *const RmSolveResult, index: usize) -> *const c_char {
    result.as_ref().and_then(|r| r.names.get(index)).map_or(ptr::null(), |n| n.as_ptr())
}

/// Value of variable `index` in the assignment.
///
/// # Safety
/// `result` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rm_result_var_value(result: *const RmSolveResult, index: usize, out: *mut f64) -> RmStatus {
    guard(|| {
        let r = handle(result, "result")?;
        let Some(name) = r.names.get(index) else {
            return fail(RmStatus::InvalidArgument, format!("variable index {index} out of range"));
        };
        if r.inner.assignment.is_empty() {
            return fail(RmStatus::NotAvailable, "no assignment was found");
        }
        let name = name.to_str().unwrap_or_default();
        put(out, r.inner.assignment.get(name).copied().unwrap_or(0.0))
    })
}

/// # Safety
/// `result` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn rm_result_free(result: *mut RmSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Execution accuracy `matches / total`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_compute_ea(matches: usize, total: usize, out: *mut f64) -> RmStatus {
    guard(|| {
        let ea = compute_ea(matches, total).or_else(|e| fail(RmStatus::InvalidArgument, e.to_string()))?;
        put(out, ea)
    })
}
