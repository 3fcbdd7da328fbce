#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod debranges;
pub mod entire_analysis;
pub mod error;
pub mod io;
pub mod paley_wiener;
pub mod quadrature;
pub mod range_rkhs;
pub mod truncation;
pub mod warps;

pub use error::{Error, ErrorCategory, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
