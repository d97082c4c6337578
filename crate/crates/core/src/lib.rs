//! Pyramid multiscale transforms for real- and manifold-valued sequences.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod error;
pub mod io;
pub mod linear;
pub mod manifold;
pub mod masks;
pub mod mpyramid;
pub mod symbol;

pub use error::{Error, Result};
