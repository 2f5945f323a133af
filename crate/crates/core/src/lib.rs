// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod block;
pub mod dsum;
pub mod schrodinger;
pub mod numerics;
pub mod serde_ext;
pub mod symbol;

pub use error::{Error, Result};
