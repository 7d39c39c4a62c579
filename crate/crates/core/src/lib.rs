//! Evaluation pipeline for specification-driven code translation.
//!
//! A model first writes a natural-language specification (pseudocode) for
//! each benchmark program. The program is then translated into other
//! languages from the specification alone, or from the specification plus
//! the source. Every candidate is compiled and, when the build fails,
//! repaired with compiler feedback for a bounded number of rounds. Finally
//! it runs against the benchmark's stdin/stdout tests.
//!
//! Modules follow the data flow:
//!
//! - [`corpus`]: benchmark loading, validation and truncated-output repair
//! - [`gateway`]: model access with live, replay and scripted backends
//! - [`prompting`]: prompt templates and code extraction from responses
//! - [`harness`]: sandboxed compile/run and outcome classification
//! - [`repair`]: the compile-error repair loop
//! - [`pipeline`]: per-attempt orchestration and experiment runs
//! - [`metrics`]: pass@1 matrices, repair deltas and reports
//! - [`quality`]: NCLOC, static-analysis issue ingestion and densities

pub mod config;
pub mod corpus;
pub mod gateway;
pub mod harness;
pub mod language;
pub mod metrics;
pub mod pipeline;
pub mod prompting;
pub mod quality;
pub mod repair;

pub use language::SubjectLanguage;
