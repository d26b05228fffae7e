//! Numerical toolkit for two-channel discrimination problems.
//!
//! A discrimination instance is a pair of quantum channels (Φ0, Φ1), one of
//! which is applied with probability 1/2. The figure of merit for a family of
//! allowed strategies is a norm of the difference map Φ0 − Φ1; this crate
//! estimates and bounds five of them, ordered by the power of the measurement
//! class used on the channel output:
//!
//! ```text
//! ‖Φ‖NE ≤ ‖Φ‖LOCC ≤ ‖Φ‖SEP ≤ ‖Φ‖PPT ≤ ‖Φ‖◇
//! ```
//!
//! * `NE` — no entanglement with an ancilla, global measurement on the output;
//! * `LOCC` — entangled input, two-party measurement by local operations and
//!   classical communication;
//! * `SEP` / `PPT` — relaxations of LOCC to separable and PPT measurement
//!   operators;
//! * `◇` — the diamond norm (completely bounded trace norm), all strategies.
//!
//! The crate is organised around a handful of modules:
//!
//! * [`linalg`] — dense complex matrices, a Hermitian eigensolver, trace
//!   norms, Jordan decompositions and bipartite index gymnastics. Everything
//!   downstream computes on these primitives.
//! * [`channels`] — Kraus representations, Choi matrices and the standard
//!   instance families (Werner-Holevo pairs, flagged Kraus pairs, Weyl
//!   instances, random binary channels, the two qubit examples).
//! * [`sdp`] — a small first-order (ADMM) solver for the PPT measurement
//!   optimisation.
//! * [`norms`] — multistart seesaw estimators for NE / diamond / PPT values,
//!   the product-measurement upper bound on SEP, and a consistency-checked
//!   norm chain report.
//! * [`locc`] — exact simulation of finite LOCC protocol trees, including the
//!   two-round perfect discriminators for flagged instances and the
//!   three-step protocol for random binary channels.
//! * [`haar`] — reproducible Haar sampling and the Monte-Carlo study of the
//!   average-case NE value of random binary channels.
//!
//! All randomness is derived from explicit integer seeds via a counter-based
//! generator, so every estimate in this crate is reproducible bit-for-bit.

pub mod channels;
mod error;
pub mod haar;
pub mod linalg;
pub mod locc;
pub mod norms;
pub mod sdp;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{BipartiteShape, Matrix, Side};
