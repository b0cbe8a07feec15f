//! Exact-arithmetic toolkit for plane-curve geometry: linear systems of
//! curves with assigned double points, their Grassmannian and flag images in
//! dual Plücker coordinates, limits of those images along one-parameter
//! degenerations, and certified nodal curves with their compactification
//! coordinates.
//!
//! Everything is computed over exact fields (arbitrary-precision rationals or
//! prime fields); there is no floating point in the crate and every
//! computation replays bit-identically from a seed.

pub mod combin;
pub mod degeneration;
pub mod error;
pub mod forms;
pub mod grassmann;
pub mod linsys;
pub mod matrix;
pub mod nodal;
pub mod qpoly;
pub mod rng;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use qpoly::QPoly;
pub use scalar::{FieldKind, Scalar};
