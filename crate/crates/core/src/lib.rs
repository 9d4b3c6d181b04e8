//! Mixtures of categorical distributions fitted by solving a multi-population,
//! finite-state stationary mean field game with an EM-like outer loop.
//!
//! * [`simplex`] and [`model`] hold the shared domain types and the model file format.
//! * [`kernel`] solves one `S`-state subsystem (policy iteration + stationary distribution).
//! * [`mixture`] runs the outer E-step/M-step loop and the classical EM baseline.
//! * [`ingest`] reads IDX files, quantizes grey levels and samples synthetic data.
//! * [`report`] scores clusterings and exports figure data.

pub mod error;
pub mod ingest;
pub mod kernel;
pub mod mixture;
pub mod model;
mod par;
pub mod report;
pub mod simplex;

pub use error::{CoreError, IngestError, KernelError, MixtureError, ReportError};
pub use kernel::{solve_subsystem, CostSpec, MfgSolution, SolverConfig};
pub use mixture::{em_baseline_fit, fit, FitConfig, FitResult};
pub use model::{Dataset, MixtureModel};
pub use simplex::{validate_simplex, SimplexVector, StochasticMatrix, ValueVector};
