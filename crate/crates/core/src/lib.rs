//! Restricted orbits of closed-range matrices and equivalence of frames for
//! subspaces, at desk scale.
//!
//! The library builds explicit intertwiners (`G A = B`, `G A K^-1 = B`,
//! `U A W* = B`) together with the norms that decide whether they lie in a
//! restricted group, and checks the optimal-approximation inequalities for
//! polar factors, canonical duals and associated Parseval frames.
//!
//! An operator ideal is modelled by a [`GaugePredicate`]: a symmetric gauge
//! plus a threshold. Every report keeps the raw norms next to the verdict.

pub mod error;
pub mod frames;
pub mod gauges;
pub mod gen;
pub mod index;
pub mod io;
pub mod linalg;
pub mod orbits;
pub mod parallel;

pub use error::{Error, Result};
pub use frames::Frame;
pub use gauges::{GaugePredicate, SymmetricGauge};
pub use linalg::{Mat, Operator, PolarDecomposition, Projection, C64};
pub use orbits::{BlockSvd, Certificate, CertificateKind};
pub use parallel::Execution;
