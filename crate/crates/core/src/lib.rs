//! Bloch-matrix (R-representation) calculus for entanglement-swapping
//! protocols on two-qubit and two-qudit sources.
//!
//! The crate is organised around the R-picture of bipartite states and
//! measurement effects: a state maps to the real matrix
//! `R_ij = tr[(sigma_i x sigma_j) rho]` and an effect to
//! `N_kl = tr[(sigma_k x sigma_l) E] / d^2`, after which an entire swapping
//! protocol collapses to a product of small real matrices. On top of that
//! sit five correlation measures (CHSH nonlocality, F3 steering, usefulness
//! for teleportation, concurrence, quantum obesity), the SLOCC normal form
//! used for local filtering, the filter-before-swap vs swap-before-filter
//! pipelines, and a brute-force density-matrix oracle that cross-checks every
//! R-picture shortcut.
//!
//! Monte-Carlo drivers shard work across a rayon pool when the default
//! `parallel` feature is enabled and fall back to plain iteration otherwise;
//! results are identical either way because every sample derives its RNG
//! stream from `(seed, index)`.

pub mod bloch;
pub mod correlations;
pub mod ensembles;
pub mod filtering;
pub mod io;
pub mod numerics;
pub mod oracle;
pub mod pathways;
pub mod swapping;

mod par;

pub use bloch::{BlochMatrix, OperatorBasis, OperatorKind, StateClass};
pub use correlations::CorrelationReport;
pub use numerics::{ComplexMatrix, RealMatrix};
pub use swapping::{ChainSpec, SwapOutcome};
