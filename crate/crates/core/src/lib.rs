#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abelian;
pub mod builtins;
pub mod bundle;
pub mod connection;
pub mod diff;
pub mod discrete;
pub mod error;
pub mod functor;
pub mod geometry;
pub mod integrator;
mod linalg;
pub mod liegroup;
pub mod quadrature;
pub mod sampling;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
