#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod converter;
pub mod error;
pub mod estimators;
pub mod excitation;
pub mod ode;
pub mod oracles;
pub mod plant;
pub mod regression;
pub mod scenario;
pub mod threephase;

pub use error::{Error, Result};
