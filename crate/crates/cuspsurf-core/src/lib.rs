#![cfg_attr(not(test), no_std)]
extern crate alloc;

pub mod connection;
pub mod curves;
pub mod dd;
pub mod error;
pub mod integrator;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result, SingularSet};
