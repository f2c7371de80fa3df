//! Conic relaxations for nonconvex box-constrained quadratic programs.
//!
//! The problem is `max x'Qx + q'x` over the unit box `[0,1]^n`. Lifting to
//! `(x, X)` with `X ~ xx'` turns it into a linear program over the convex hull
//! of rank-one lifts. This crate builds outer approximations of that hull:
//!
//! * PSD on `Y(x,X)`, the McCormick (RLT) bounds and the triangle inequalities,
//! * the three extended triangle families (ETRI1/2/3) on index triples,
//!   generated from a handful of base inequalities by switching and permuting,
//! * second-order cone caps on a lifted trilinear variable `z ~ x_i x_j x_k`.
//!
//! Two exact references are included for verification: the disjunctive
//! doubly-nonnegative representation of the `n = 3` hull ([`exact`]) and a
//! stationary-point enumeration solver for small `n` ([`oracle`]).
//!
//! Conic programs are solved through the [`conic::ConicBackend`] trait; the
//! shipped backend wraps the Clarabel interior-point solver.

pub mod bench;
pub mod conic;
pub mod cuts;
pub mod driver;
pub mod exact;
pub mod model;
pub mod oracle;
pub mod par;

pub use conic::{
    BackendSolution, ClarabelBackend, ConicBackend, ConicProgram, RelaxationLevel, SolveStatus,
    TrilinearBlock,
};
pub use cuts::{Family, LinearCut, SwitchPattern};
pub use model::{BoxQpInstance, ModelError, MomentPoint, SymIndex};
