pub mod assemble;
pub mod cli;
pub mod eval;
pub mod extract;
pub mod graph;
pub mod identify;
pub mod llm;
pub mod pipeline;
pub mod registry;
pub mod solver;
