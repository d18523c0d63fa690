//! Small self-contained numerical kernels used throughout the crate.

pub mod eigen;
pub mod linalg;
pub mod ode;
pub mod quad;
pub mod roots;

pub use linalg::Scalar;
