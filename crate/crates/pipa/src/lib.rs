//! Workbench for the probabilistic asynchronous pi-calculus: terms, a
//! probabilistic transition-group semantics, adversaries, tree measures and a
//! randomized leader-election case study.

pub mod automaton;
pub mod cli;
pub mod election;
pub mod measure;
pub mod parser;
pub mod pretty;
pub mod pts;
pub mod scheduler;
pub mod term;

pub use term::{Name, Process, ProcessId, Rat};
