//! Exact jet computations for real hypersurfaces in almost complex spaces.
//!
//! Everything works over the rationals with truncated Taylor polynomials:
//! the Levi form and its higher-order relatives, formal pseudoholomorphic
//! disks, Lie brackets of complex tangent fields, and a staged search for the
//! regular type at a point.
#![no_std]

extern crate alloc;

pub mod catalog;
pub mod disks;
pub mod engine;
mod error;
pub mod geometry;
pub mod levi;
pub mod linalg;
pub mod series;

pub use error::{Error, ErrorClass, Result};
pub use series::{MultiIndex, TruncatedSeries};

/// Exact rational scalar used throughout.
pub type Rational = num_rational::BigRational;

/// Gaussian rationals `a + b i`.
pub type ComplexRational = num_complex::Complex<Rational>;
