//! Frank-copula regression for the ratio of two gamma-distributed components.

pub mod cli;
pub mod copula;
pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod optim;
pub mod ratio;
mod roots;
pub mod simlab;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
