// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod chi;
pub mod error;
pub mod exact;
pub mod extremal;
pub mod occupation;
pub mod schmidt;
pub mod special;

pub use error::{Error, Result};
