//! Experiment orchestration for the hybrid quantum-classical network lab:
//! dataset generation, model-zoo construction, multi-seed training runs,
//! noise and circuit-metric sweeps, complexity accounting, and file output.

pub mod config;
pub mod experiment;
pub mod io;
