//! Random walks, Green and Martin kernels, and boundary measures on thick affine
//! buildings, computed through the spherical Hecke algebra of the underlying
//! affine Weyl group.

pub mod apartment;
pub mod boundary;
pub mod error;
pub mod hecke;
pub mod root_data;
pub mod spherical;
pub mod vector;
pub mod walks;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use root_data::{ParameterSystem, RootDatum, RootType, WeylElement};
pub use vector::{Vector, Q};
