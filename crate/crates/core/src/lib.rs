//! Explicit-state exploration of client/server concurrent systems with
//! stateful partial-order reduction.
//!
//! The crate is organized bottom-up:
//!
//! * [`sets`], [`model`]: action/process bit sets, local transition systems,
//!   global semantics, validation, state interning.
//! * [`parse`]: the `.csys` text format.
//! * [`traces`]: commutation-based equivalence of runs, first sets, normal
//!   forms, exhaustive run enumeration, and the exact initial-fragment check.
//! * [`heuristics`]: the polynomial oracles and covering-set constructions
//!   used to steer reduced exploration.
//! * [`explorer`]: the reduced exploration engine (sleep sets, subsumption)
//!   and its preset configurations.
//! * [`generators`]: benchmark families, worked examples, SAT gadgets.
//! * [`verifier`]: brute-force soundness, completeness, and optimality
//!   checks used to audit reduced explorations.

pub mod explorer;
pub mod generators;
pub mod heuristics;
pub mod model;
pub mod parse;
pub mod sets;
pub mod traces;
pub mod verifier;

pub use model::{GlobalState, ProcKind, Process, System, SystemBuilder};
pub use sets::{ActionId, ActionSet, ProcId, ProcessSet};
