//! Numerical tolerances shared across the crate.
//!
//! Three tiers: exact algebra on Pauli coefficients, dense-matrix oracle
//! round trips, and anything produced by spherical quadrature.

/// Structural identities (completeness, extremality, column sums).
pub const STRUCTURAL: f64 = 1e-12;

/// Dense 2x2 / 4x4 oracle round trips.
pub const ORACLE: f64 = 1e-14;

/// Default comparison tolerance for quadrature-derived quantities.
pub const QUADRATURE_DEFAULT: f64 = 1e-3;

/// Reconstruction residual accepted for four-outcome simulations on a
/// quadrature grid of Lebedev order 131.
pub const QUADRATURE_RESIDUAL: f64 = 2e-3;

/// Reconstruction residual for the closed-form three-outcome parent.
pub const ANALYTIC_RESIDUAL: f64 = 1e-10;

/// Reconstruction residual for the exact spherical-polygon backend.
pub const POLYGON_RESIDUAL: f64 = 1e-9;

/// Slack allowed on negative response entries before a construction is
/// declared broken.
pub const NEGATIVE_ENTRY: f64 = 1e-12;

/// Accepted `|Ax - b|` for an LP feasibility solution.
pub const LP_RESIDUAL: f64 = 1e-9;

/// Accepted negativity of `A^T y` for a Farkas certificate.
pub const CERTIFICATE_SLACK: f64 = 1e-10;

/// `b^T y` must be below `-CERTIFICATE_MARGIN` for a certificate to count.
pub const CERTIFICATE_MARGIN: f64 = 1e-12;

/// A node is on a region boundary when `|m . l|` falls below this.
pub const BOUNDARY: f64 = 1e-12;

/// Outcome weights below this are treated as zero.
pub const ZERO_WEIGHT: f64 = 1e-12;

/// Pseudo-effect weights below this trigger the degenerate pairing path.
pub const PSEUDO_WEIGHT: f64 = 1e-9;

/// Coplanarity residual accepted (and projected away) for three directions.
pub const COPLANAR: f64 = 1e-10;

/// Accepted deviation from unit norm when reading directions from files.
pub const READ_NORMALIZE: f64 = 1e-9;
