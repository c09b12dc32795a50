//! Workbench for implicit graph representations (adjacency labeling schemes).
//!
//! A labeling scheme assigns each vertex of a graph a short label so that
//! adjacency of two vertices can be decided from their labels alone. This
//! crate provides:
//!
//! * [`graphs`] — small directed/undirected graphs, graph6/digraph6 I/O,
//!   canonical codes and a total order on unlabeled graphs, exhaustive
//!   enumeration of isomorphism classes.
//! * [`logic`] — first-order label decoders over the capped arithmetic
//!   structure on `[n]`: a formula DSL, evaluation, negation/disjunctive
//!   normal forms for the quantifier-free order fragment, and semantic
//!   canonicalization via weak orders.
//! * [`schemes`] — labeling schemes with bit-string or logical decoders:
//!   membership search, label normalization, scheme unions, interval and
//!   multi-interval schemes, and the graph parameters `lambda_intv` and
//!   `lambda_foqf`.
//! * [`dags`] — the DAG view of quantifier-free order decoders: compiling
//!   clauses to DAGs and back, transitive-closure canonical forms, weighted
//!   arcs, and the `k`-expressibility decision procedure.
//! * [`diag`] — a micro-scale diagonalization over a finite decoder
//!   registry: the admissible pairing, per-size smallest missing graphs,
//!   the induced lookup decoder, and an exhaustive verification report.
//!
//! Everything is exact and budget-guarded: searches report a witness, a
//! definitive absence, or an explicit budget overrun, never a silent
//! approximation.

pub mod dags;
pub mod diag;
pub mod graphs;
pub mod logic;
pub mod schemes;
pub mod search;

pub use search::{Budget, SearchOutcome};
