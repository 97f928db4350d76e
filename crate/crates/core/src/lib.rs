#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cubemaps;
pub mod cubical;
pub mod deform;
pub mod error;
pub mod grassmann;
pub mod linalg;
pub mod map;
pub mod measure;
pub mod profile;
pub mod region;
pub mod solver;
pub mod varifold;

pub use error::{Error, Result};
