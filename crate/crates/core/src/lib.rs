//! Noncommutative `L^p` toolkit on finite traced matrix algebras.
//!
//! The crate models a finite direct sum of matrix blocks with a weighted
//! trace and provides
//!
//! - Schatten-type norms, polar parts, spectral projections and the other
//!   spectral tools ([`traced_algebra`]);
//! - finite unital *-algebras given by structure constants ([`star_domain`]);
//! - positive sesquilinear maps with algebraic or sampled positivity
//!   certificates ([`sesquilinear`]);
//! - checkers for Cauchy–Schwarz type inequalities, real/imaginary part
//!   estimates and uncertainty relations ([`inequalities`]);
//! - the numerical radius, the generalized numerical-radius norm `⦀·⦀₂` and
//!   operator norms of superoperators ([`radius_norms`]);
//! - GNS-type representations of positive maps ([`gns`]);
//! - kernel-driven map families built by functional calculus ([`kernel_examples`]);
//! - a seeded batch driver with JSON/CSV reports ([`driver`]).

pub mod driver;
pub mod error;
pub mod gns;
pub mod inequalities;
pub mod io;
pub mod kernel_examples;
pub mod linalg;
pub mod radius_norms;
pub mod rng;
pub mod sesquilinear;
pub mod star_domain;
pub mod traced_algebra;

pub use error::{Error, Result};
pub use traced_algebra::{AlgebraElement, PExponent, TracedAlgebra};
