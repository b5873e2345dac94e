//! Compatibility and local-hidden-state models for noisy qubit POVMs.
//!
//! A qubit effect is stored in Pauli form `t I + b.sigma`. Extremal POVMs
//! with three or four outcomes are simulated at visibility 1/2 by a parent
//! obtained from coarse-graining the sphere into sign-pattern regions,
//! followed by an explicit response table. The same construction yields a
//! local-hidden-state model for the two-qubit Werner state.
//!
//! ```
//! use steerkit::{simulate_three, ExtremalPovm};
//!
//! let sim = simulate_three(&ExtremalPovm::trine()).unwrap();
//! assert!(sim.residual < 1e-12);
//! ```

pub mod dense;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod lp;
pub mod partition;
pub mod pauli;
pub mod polygon;
pub mod quadrature;
pub mod response;
pub mod sim_four;
pub mod sim_three;
pub mod steering;
pub mod tolerance;

pub use error::{Error, Result};
pub use feasibility::{
    build_system, pvm_radius, solve_feasible, verify_certificate, FarkasCertificate, LinearSystem, LpOutcome,
    RadiusReport,
};
pub use io::{parse_povm_file, read_povm_file, EffectSpec, PovmFile};
pub use partition::{
    coarse_grain, coarse_grain_coplanar3, coarse_grain_exact, coarse_grain_with, Backend, CoarseGrainedPovm,
    RegionLabel,
};
pub use pauli::{sample_extremal_povm, Effect, ExtremalPovm, Outcome, Povm, Vec3};
pub use quadrature::{load_lebedev, product_grid, GridSpec, GridSummary, QuadratureGrid};
pub use response::ResponseTable;
pub use sim_four::{brute_force_14, simulate_four, Pairing};
pub use sim_three::{simulate_three, Route, Simulation};
pub use steering::{build_lhs, unsteerability_suite, LhsModel, WernerState};

/// Crate version, embedded in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
