use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use roster_milp_ffi::*;

fn datasets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../datasets")
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(rm_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    rm_string_free(s);
    out
}

unsafe fn formulate(instance: &str, ptype: &str, model_id: &str) -> (RmStatus, *mut RmModel) {
    let dir = datasets().join(instance);
    let desc = std::fs::read_to_string(dir.join("description.md")).unwrap();
    let mut graph = ptr::null_mut();
    assert_eq!(rm_graph_bundled(c(ptype).as_ptr(), &mut graph), RmStatus::Ok);
    let mut model = ptr::null_mut();
    let fixtures = c(dir.join("fixtures").to_str().unwrap());
    let status = rm_formulate_replay(graph, c(&desc).as_ptr(), c(model_id).as_ptr(), fixtures.as_ptr(), -1, &mut model);
    rm_graph_free(graph);
    (status, model)
}

#[test]
fn formulate_render_and_solve_bus_drivers() {
    unsafe {
        let (status, model) = formulate("bundled/bus-drivers", "shift", "reference-script");
        assert_eq!(status, RmStatus::Ok, "{}", last_error());
        assert_eq!(rm_model_var_count(model), 6);
        assert_eq!(rm_model_row_count(model), 6);

        let mut s = ptr::null_mut();
        assert_eq!(rm_model_latex(model, &mut s), RmStatus::Ok);
        assert!(take(s).contains(r"\begin{document}"));
        assert_eq!(rm_model_lp(model, &mut s), RmStatus::Ok);
        let lp = take(s);
        assert!(lp.starts_with("Minimize"));

        let mut result = ptr::null_mut();
        assert_eq!(rm_model_solve(model, 0, &mut result), RmStatus::Ok);
        let mut st = RmSolveStatus::NodeLimit;
        assert_eq!(rm_result_status(result, &mut st), RmStatus::Ok);
        assert_eq!(st, RmSolveStatus::Optimal);
        let mut obj = 0.0;
        assert_eq!(rm_result_objective(result, &mut obj), RmStatus::Ok);
        assert_eq!(obj, 26.0);
        let n = rm_result_var_count(result);
        assert_eq!(n, 6);
        let mut sum = 0.0;
        for i in 0..n {
            let name = CStr::from_ptr(rm_result_var_name(result, i)).to_str().unwrap();
            assert_eq!(name, format!("x_{}", i + 1));
            let mut v = -1.0;
            assert_eq!(rm_result_var_value(result, i, &mut v), RmStatus::Ok);
            sum += v;
        }
        assert_eq!(sum, 26.0);
        let mut v = 0.0;
        assert_eq!(rm_result_var_value(result, n, &mut v), RmStatus::InvalidArgument);
        assert!(rm_result_var_name(result, n).is_null());
        rm_result_free(result);

        // The rendered LP solves to the same optimum.
        let mut again = ptr::null_mut();
        assert_eq!(rm_lp_solve(c(&lp).as_ptr(), 0, &mut again), RmStatus::Ok);
        assert_eq!(rm_result_objective(again, &mut obj), RmStatus::Ok);
        assert_eq!(obj, 26.0);
        rm_result_free(again);
        rm_model_free(model);
    }
}

#[test]
fn post_office_through_the_days_off_graph() {
    unsafe {
        let (status, model) = formulate("bundled/post-office", "days-off", "reference-script");
        assert_eq!(status, RmStatus::Ok, "{}", last_error());
        let mut result = ptr::null_mut();
        assert_eq!(rm_model_solve(model, 0, &mut result), RmStatus::Ok);
        let mut obj = 0.0;
        assert_eq!(rm_result_objective(result, &mut obj), RmStatus::Ok);
        assert_eq!(obj, 11000.0);
        rm_result_free(result);
        rm_model_free(model);
    }
}

#[test]
fn failures_carry_codes_and_messages() {
    unsafe {
        let (status, model) = formulate("bundled/bus-drivers", "shift", "another-model");
        assert_eq!(status, RmStatus::Identify);
        assert!(model.is_null());
        assert!(last_error().contains("fixture"), "{}", last_error());

        let mut graph = ptr::null_mut();
        assert_eq!(rm_graph_bundled(c("rostering").as_ptr(), &mut graph), RmStatus::InvalidArgument);
        assert_eq!(rm_graph_bundled(ptr::null(), &mut graph), RmStatus::NullArgument);
        assert_eq!(rm_graph_bundled(c("shift").as_ptr(), ptr::null_mut()), RmStatus::NullArgument);
        assert_eq!(rm_graph_load(c("/no/such/graph.json").as_ptr(), &mut graph), RmStatus::Io);
        let bad = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(bad.path(), "{ not json").unwrap();
        assert_eq!(rm_graph_load(c(bad.path().to_str().unwrap()).as_ptr(), &mut graph), RmStatus::Parse);
        assert!(graph.is_null());

        let invalid = [0xffu8, 0];
        let mut result = ptr::null_mut();
        assert_eq!(rm_lp_solve(invalid.as_ptr().cast(), 0, &mut result), RmStatus::InvalidUtf8);
        assert_eq!(rm_lp_solve(c("garbage").as_ptr(), 0, &mut result), RmStatus::Parse);

        let mut ea = 0.0;
        assert_eq!(rm_compute_ea(18, 20, &mut ea), RmStatus::Ok);
        assert_eq!(ea, 0.9);
        assert_eq!(rm_compute_ea(7, 20, &mut ea), RmStatus::Ok);
        assert_eq!(ea, 0.35);
        assert_eq!(rm_compute_ea(1, 0, &mut ea), RmStatus::InvalidArgument);

        // Null handles are tolerated by counts and frees.
        assert_eq!(rm_model_var_count(ptr::null()), 0);
        assert_eq!(rm_graph_node_count(ptr::null()), 0);
        rm_model_free(ptr::null_mut());
        rm_result_free(ptr::null_mut());
        rm_string_free(ptr::null_mut());
    }
}

#[test]
fn infeasible_lp_has_no_objective() {
    unsafe {
        let lp = c("Minimize\n obj: x\nSubject To\n c1: x >= 3\n c2: x <= 2\nGenerals\n x\nEnd\n");
        let mut result = ptr::null_mut();
        assert_eq!(rm_lp_solve(lp.as_ptr(), 0, &mut result), RmStatus::Ok);
        let mut st = RmSolveStatus::Optimal;
        rm_result_status(result, &mut st);
        assert_eq!(st, RmSolveStatus::Infeasible);
        let mut obj = 0.0;
        assert_eq!(rm_result_objective(result, &mut obj), RmStatus::NotAvailable);
        rm_result_free(result);
    }
}

#[test]
fn bundled_graphs_load() {
    unsafe {
        for p in ["shift", "days-off", "shift-scheduling", "days-off-scheduling"] {
            let mut g = ptr::null_mut();
            assert_eq!(rm_graph_bundled(c(p).as_ptr(), &mut g), RmStatus::Ok);
            assert!(rm_graph_node_count(g) > 10);
            rm_graph_free(g);
        }
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/roster_milp.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> =
        src.lines().filter_map(|l| l.split("extern \"C\" fn ").nth(1)).map(|r| r.split('(').next().unwrap()).collect();
    assert!(exports.len() >= 18);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from the header");
    }
    for ty in ["typedef struct RmGraph RmGraph;", "typedef struct RmModel RmModel;", "RM_STATUS_PANIC = 12"] {
        assert!(header.contains(ty), "{ty}");
    }
}
