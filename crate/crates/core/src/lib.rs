//! Tensor complementarity problems over the nonnegative orthant and
//! finitely generated polyhedral cones.
//!
//! The problem `TCP(K, q, A)` asks for `x ∈ K` with `w = A x^{m-1} + q ∈ K*`
//! and `<x, w> = 0`. The crate provides the tensor algebra, cone geometry,
//! numeric classification of tensors (copositivity, regularity,
//! nonsingularity), complementary-cone decomposition of the solvable set over
//! the orthant, a solver, and probes that exercise the stability theory
//! empirically.

pub mod classify;
pub mod complementary;
pub mod cone;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod poly;
pub mod rng;
pub mod search;
pub mod solver;
pub mod stability;
pub mod tensor;

pub use classify::{SearchBudget, Status, Verdict};
pub use cone::{delta_metric, ConeKind, MetricEstimate, PolyhedralCone};
pub use error::{Result, TcpError};
pub use tensor::{power_vec, IndexSet, Tensor};
