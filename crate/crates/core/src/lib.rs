//! Approximate resilience of Boolean functions.

pub mod amplify;
pub mod builder;
pub mod cube;
pub mod design;
pub mod error;
pub mod fnspec;
pub mod fourier;
pub mod function;
pub mod learn;
pub mod lp;
pub mod witness;
pub mod zoo;

pub use error::{Error, Result};
pub use fnspec::{FnSpec, Table};
pub use function::{BooleanFunction, BoundedFunction, CubeFunction};
