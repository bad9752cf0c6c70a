//! Numerical toolkit for continuous valuations on convex bodies.

pub mod bodies;
pub mod conventions;
pub mod error;
pub mod hermitian;
pub mod intrinsic;
pub mod kinematic;
pub mod linalg;
pub mod mc;
pub mod valgebra;

pub use conventions::Conventions;
pub use error::{Error, Result};
pub use mc::{McConfig, McEstimate, Stream};
