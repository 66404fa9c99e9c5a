//! Exact equivariant periodic cyclic homology for finite groupoids.

pub mod error;
pub mod forms;
pub mod funcspace;
pub mod galgebra;
pub mod greenjulg;
pub mod gmodule;
pub mod groupoid;
pub mod homalg;
pub mod linalg;
pub mod q;
pub mod stability;
pub mod tensoralg;

pub use error::{Error, Result};
pub use q::Q;
