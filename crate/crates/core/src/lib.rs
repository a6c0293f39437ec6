//! Forward and inverse spectral problems for the Sturm–Liouville operator
//! with frozen argument on the closed set `T = [0, γ] ∪ [a, b]`.
//!
//! The crate computes spectra from potentials, reconstructs the
//! characteristic function from a spectrum, recovers the potential, and
//! checks candidate spectra against the solvability conditions of the
//! `l = γ` case. Every routine is deterministic and independent of the
//! number of worker threads.

pub mod basis;
pub mod characterization;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod product;
pub mod quad;
pub mod roots;
pub mod seq;
pub mod spline;
pub mod trig;

pub use error::{Error, Result};
pub use forward::{CharFunction, Characteristic, Scaled, Spectrum, SpectrumSource};
pub use geometry::{Geometry, Potential, Profile};
pub use num_complex::Complex64;
