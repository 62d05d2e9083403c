//! Coupled Stokes-Brinkman-Darcy flow on 2D layered domains.
//!
//! Two models of the same physical system:
//!
//! * the **full-dimensional** model resolves the thin transition zone
//!   between free flow and porous medium with the Brinkman equations,
//!   coupled to Stokes above and Darcy below through velocity continuity,
//!   stress jump, force balance and Beavers-Joseph-Saffman conditions;
//! * the **reduced** (hybrid-dimensional) model replaces the transition
//!   zone by an interface line carrying averaged unknowns `(U, V, P)`
//!   governed by 1D mass/momentum equations and coupled to the bulk
//!   through transmission conditions.
//!
//! Both are discretized with a second-order staggered (MAC) finite-volume
//! scheme and solved monolithically. The `verification` module carries
//! manufactured solutions reproducing second-order convergence; the
//! `scenarios` module runs the filtration benchmark comparing the two
//! models' accuracy and cost.
//!
//! See the `examples/` directory for runnable entry points.

pub mod assembly;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;
pub mod params;
pub mod scenarios;
pub mod solver;
pub mod system;
pub mod verification;

pub use error::{Error, Result};
pub use grid::{build_grid, GeometryConfig, ModelKind, StaggeredGrid};
pub use params::{closure_params, m_projection, ClosureProfile, PhysicalParams, SymTensor2};
pub use solver::{solve, solve_auto, Method, SolveReport};
pub use system::LinearSystem;
