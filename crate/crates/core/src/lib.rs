//! Gauge-theory gravity built on the de Sitter group SO(4,1).
//!
//! The crate covers the Lie algebra and its contractions, spinning point
//! matter, a lattice discretisation with holonomies and Wilson action, the
//! component field equations, geodesics and the classic weak-field tests,
//! post-Newtonian fields, quadrupole radiation and a homogeneous cosmology.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algebra;
pub mod cosmology;
pub mod error;
pub mod field;
pub mod geodesic;
pub mod lattice;
pub mod matter;
pub mod ode;
pub mod post_newtonian;
pub mod potential;
pub mod quadrature;
pub mod radiation;
pub mod stencil;
pub mod tensor;
pub mod units;

pub use error::{Error, Result};
