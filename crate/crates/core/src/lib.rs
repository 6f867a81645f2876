//! Combinatorial engine for deciding intrinsic harmonicity of rank-one
//! closed Morse 1-forms on surfaces.
//!
//! * [`scalar`]: exact rational-linear arithmetic over declared irrationals.
//! * [`graph`]: foliation graphs, the Calabi (transitivity) decision,
//!   complexity and surface invariants.
//! * [`reduction`]: cut / reorder / reglue reduction to a Calabi graph with
//!   the same critical-point counts.
//! * [`surface`]: connected sums of linear torus forms and their leaf and
//!   cohomology-class analysis.
//! * [`io`]: text formats for graphs and surfaces, and DOT export.

pub mod graph;
pub mod io;
pub mod reduction;
pub mod scalar;
pub mod surface;
