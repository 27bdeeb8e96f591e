//! Regenerates `fixtures/` for dataset instances from their `script.json`.
//!
//!     cargo run --example author_fixtures -- datasets/bundled datasets/synthetic
//!
//! Fixtures are keyed on the model id `reference-script`; replay them with
//! `--model-id reference-script`.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use roster_milp::eval::{load_dataset, optimum_matches};
use roster_milp::llm::{FixtureStore, RecordingBackend, ScriptedBackend, ScriptedResponses};
use roster_milp::pipeline::Pipeline;
use roster_milp::solver::solve_model;

const MODEL_ID: &str = "reference-script";

fn main() -> ExitCode {
    let mut ok = true;
    for dataset in std::env::args().skip(1) {
        let instances = match load_dataset(Path::new(&dataset)) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("{dataset}: {e}");
                return ExitCode::FAILURE;
            }
        };
        for inst in instances {
            let script = match ScriptedResponses::load(&inst.dir.join("script.json")) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", inst.id);
                    ok = false;
                    continue;
                }
            };
            let fixtures = inst.fixture_dir();
            if fixtures.exists() {
                fs::remove_dir_all(&fixtures).expect("clear old fixtures");
            }
            let backend = RecordingBackend::new(ScriptedBackend::new(script), FixtureStore::new(&fixtures));
            let run = Pipeline::bundled(inst.meta.problem_type, MODEL_ID).run(&inst.description, &backend);
            let formulation = match run.outcome {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("{}: {}: {e}", inst.id, e.stage());
                    ok = false;
                    continue;
                }
            };
            let solved = solve_model(&formulation.assembly.model).expect("solver runs");
            let verdict = match (solved.objective, inst.meta.reference_optimum) {
                (Some(c), Some(r)) if optimum_matches(c, r) => "match",
                (_, Some(_)) => {
                    ok = false;
                    "MISMATCH"
                }
                _ => "unscored",
            };
            let count = fs::read_dir(&fixtures).map(|d| d.count()).unwrap_or(0);
            println!(
                "{:<14} {:>3} fixtures  {} {:?} (reference {:?}) {verdict}",
                inst.id, count, solved.status, solved.objective, inst.meta.reference_optimum
            );
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
