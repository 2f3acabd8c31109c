//! Numerical laboratory for the CR Yamabe problem on the Heisenberg group H¹.

pub mod error;
pub mod bubbles;
pub mod cayley;
pub mod deform;
pub mod heis;
pub mod jets;
pub mod quad;
pub mod reduce;
pub mod webster;

pub use error::{Error, Result};
pub use heis::HPoint;
