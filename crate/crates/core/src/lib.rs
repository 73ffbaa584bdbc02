pub mod eigensolve;
pub mod error;
pub mod fem_scalar;
pub mod fem_vector;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod oracle;
pub mod par;
pub mod sparse;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
