//! Generalized entropies of partitions and symbolic dynamical systems.

// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dynent;
pub mod error;
pub mod gfun;
pub mod measure;
pub mod numeric;
pub mod systems;
pub mod towers;

pub use error::{Error, Result};
pub use gfun::{GClass, GFunction, RatioLimits};
