//! Finite-volume solver for random one-dimensional hyperbolic conservation
//! laws in which the flux closure at every (space, random) cell comes from
//! minimizing a convex entropy over discretized Young measures via linear
//! programming, plus a stochastic-collocation reference solver and an
//! experiment harness.
//!
//! The numerical core is generic over the floating-point scalar through
//! [`Real`]; the harness and the concrete aliases below fix `f64`.

pub mod closure;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod lp;
pub mod model;
pub mod phase;
pub mod scalar;
pub mod scenario;
pub mod scheme;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Real;

/// f64 aliases for the common entry points.
pub type Model = model::ModelSpec<f64>;
pub type Entropy = model::EntropyChoice<f64>;
pub type State = state::StateVec<f64>;
pub type Grid = phase::PhaseGrid<f64>;
pub type Slice = closure::YoungMeasureSlice<f64>;
pub type Field = field::MomentField<f64>;
pub type Setup = scheme::SolverSetup<f64>;
pub type Problem = lp::LpProblem<f64>;
pub type Solution = lp::LpSolution<f64>;
