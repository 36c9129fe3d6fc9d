pub mod error;
pub mod faber;
pub mod gle;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod models;
pub mod oracles;
pub mod quadrature;

pub use error::{Error, Result};
