//! Exact combinatorics behind iterated weight filtrations.
//!
//! * [`lattice`]: finite modular lattices, interval classes, complements and
//!   lattices of closed subgraphs.
//! * [`hn`]: polarizations, phases, Harder-Narasimhan filtrations and mass.
//! * [`weight`]: ℝ-filtrations, the lattices Λ(a), weight filtrations and
//!   their iteration.
//! * [`dag`]: weight gradings of directed acyclic graphs with KKT
//!   certificates, the associated gradient flow and the G⁽ⁿ⁾ family.
//!
//! All lattice and grading computations use exact rational arithmetic.

pub mod dag;
pub mod hn;
pub mod io;
pub mod lattice;
pub mod lp;
pub mod rational;
pub mod weight;

pub use rational::{Gauss, Mass, Q};

/// Errors raised by the exact algorithms.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not a lattice: {0}")]
    NotALattice(String),
    #[error("no global bounds: {0}")]
    NoBounds(String),
    #[error("elements {0} and {1} are not comparable")]
    NotComparable(usize, usize),
    #[error("empty interval")]
    EmptyInterval,
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("not semistable: {0}")]
    NotSemistable(String),
    #[error("not paracomplemented: {0}")]
    NotParacomplemented(String),
    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),
    #[error("no strictly positive certificate exists")]
    NoStrictCertificate,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
