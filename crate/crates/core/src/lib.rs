//! High-order finite volume solvers for the linear advection equation in one
//! and two space dimensions, with interchangeable slope-limiting strategies.
//!
//! The crate is organized around a small set of building blocks:
//!
//! * [`mesh`] — uniform grids and cell-average fields with ghost layers,
//! * [`stencil`] — exact-rational generation of conservative reconstruction
//!   stencils and Gauss quadrature rules,
//! * [`flux`] — the upwind numerical flux and the semi-discrete spatial
//!   operator under both 2D face-integration strategies,
//! * [`timestepping`] — explicit Runge-Kutta integration, the adaptive
//!   maximum-principle time-step wrapper, and linear stability utilities,
//! * [`limiter_apriori`] / [`limiter_aposteriori`] / [`sed`] — the two
//!   slope-limiting paradigms and smooth extrema detection,
//! * [`solver`] — named scheme assembly and the time-advance driver,
//! * [`diagnostics`] — maximum-principle violation tracking, L1 errors,
//!   and throughput measurement,
//! * [`bench`] — benchmark problem definitions and experiment runners.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod limiter_aposteriori;
pub mod limiter_apriori;
pub mod mesh;
pub mod sed;
pub mod solver;
pub mod stencil;
pub mod timestepping;

pub use diagnostics::{ErrorRecord, RunReport, ViolationTracker};
pub use error::{Error, Result};
pub use flux::{FaceFluxField, FluxFunction, VelocityField};
pub use mesh::{BoundaryCondition, CellField, Dim, Grid};
pub use solver::{Scheme, SchemeConfig, SchemeName, Snapshot};
pub use stencil::{QuadratureKind, QuadratureRule, Stencil};
pub use timestepping::ButcherTableau;
