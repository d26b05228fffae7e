//! Central home for every numerical tolerance used by the crate.
//!
//! Keeping these in one place gives the tests a single knob: nothing else in
//! the crate hardcodes a comparison threshold.

/// Exact algebraic identities (hermiticity checks, trace preservation of an
/// algebraically trace-preserving family, completeness sums, ...).
pub const EXACT: f64 = 1e-10;

/// Residual allowed for matrix decompositions: eigendecomposition
/// reconstruction, Kraus-from-Choi round trips, induced-measurement sums.
pub const DECOMP: f64 = 1e-9;

/// Default stopping tolerance of the first-order SDP solver.
pub const SDP: f64 = 1e-7;

/// Default iteration cap of the first-order SDP solver.
pub const SDP_MAX_ITER: usize = 20_000;

/// Convergence threshold on the objective value of a seesaw ascent.
pub const SEESAW: f64 = 1e-10;

/// Iteration cap of a single seesaw ascent.
pub const SEESAW_MAX_ITER: usize = 500;

/// Eigenvalue gap below which the top eigenspace is treated as degenerate and
/// the seesaw keeps the previous iterate's projection instead of switching
/// branches.
pub const DEGENERACY_GAP: f64 = 1e-12;

/// Branches of a protocol tree whose transcript probability falls below this
/// are pruned during evaluation.
pub const PRUNE: f64 = 1e-14;

/// Slack added when asserting that a lower bound does not exceed an upper
/// bound in a norm chain.
pub const CHAIN_SLACK: f64 = 1e-6;

/// Two matching bounds closer than this are collapsed to an `exact` estimate.
pub const EXACT_MATCH: f64 = 1e-6;
