pub mod graph;
pub mod linalg;
pub mod potential;
pub mod closed_forms;
pub mod rng;
pub mod sampler;
pub mod experiments;
pub mod cli;
