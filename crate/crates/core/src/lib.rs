pub mod cli;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod isoperimetric;
pub mod optimize;
pub mod quadrature;
pub mod sobolev;
pub mod specfun;
pub mod transport;

pub use error::{LabError, Result};
