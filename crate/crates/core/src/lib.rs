//! Rational graph-directed Markov systems on the Riemann sphere.
//!
//! The crate builds a system from a directed graph whose edges carry finite
//! families of rational maps, checks the standing hypotheses (irreducibility,
//! separation, hyperbolicity screens), approximates the per-vertex Julia sets
//! by backward iteration, and computes the zero `delta` of the geometric
//! pressure `t -> P(t)` with two independent estimators. Box-counting gives
//! an independent upper-bound cross-check.
//!
//! Module overview:
//!
//! * [`ratmap`]: sphere points, polynomials, rational maps, root finding
//! * [`symbolic`]: incidence matrices, word enumeration, entropy
//! * [`gdms`]: the assembled system, word maps, skew product, configs
//! * [`julia`]: inverse-iteration clouds, rendering, box counting
//! * [`periodic`]: repelling periodic points of the skew product
//! * [`thermo`]: pressure estimators and the Bowen zero
//! * [`verify`]: hypothesis checkers and certificates

pub mod error;
pub mod format;
pub mod gdms;
pub mod julia;
pub mod periodic;
pub mod ratmap;
pub mod symbolic;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use gdms::{GdmsSystem, SymbolicWord};
pub use ratmap::{ComplexPolynomial, RationalMap, SpherePoint};
