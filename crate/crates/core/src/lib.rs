//! Numerical laboratory for a stiff three-component linear transport system.
//!
//! Two of the unknowns (`u`, `v`) relax toward each other on an `O(eps^2)`
//! time scale while being advected at their own speeds; the third (`w`) is a
//! slow component coupled to both. The crate provides
//!
//! - a brute-force solver for the full stiff system ([`solver`]), built from
//!   first-order upwind transport and an exact closed-form relaxation update
//!   composed by Strang splitting, so the time step is never limited by the
//!   stiffness;
//! - the zeroth-order asymptotic description ([`asymptotics`]): the reduced
//!   two-field system obtained in the relaxed limit, the initial-layer
//!   corrector that decays like `exp(-(a+b) t / eps^2)`, and the assembled
//!   main term;
//! - measurement tools ([`analysis`]): norms, convergence-order and decay-rate
//!   fits, transition-layer location, conservation residuals, and an exact
//!   matrix-exponential oracle for the space-homogeneous limit.
//!
//! Cell updates are data-parallel; with the `parallel` feature (default) large
//! grids are processed by rayon, and results are bit-identical to the
//! sequential fallback.

pub mod analysis;
pub mod asymptotics;
pub mod exec;
pub mod expm;
pub mod fields;
pub mod grid;
pub mod model;
pub mod profiles;
pub mod solver;

pub use fields::FieldTriple;
pub use grid::Grid1D;
pub use model::{DerivedConstants, ModelParams, ValidatedParams};
pub use profiles::ProfileSpec;
pub use solver::{Boundary, SolutionTrace, SolverConfig};
