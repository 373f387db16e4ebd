//! Auxiliary-function methods for the time-fractional diffusion equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fracquad;
pub mod ibvp;
pub mod laplace;
pub mod par;
pub mod pulse;
pub mod quad;
pub mod roots;
pub mod specfun;
pub mod stefan;
pub mod verify;
pub mod volterra;

pub use error::{Error, Result};
