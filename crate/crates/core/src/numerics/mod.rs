//! Numerical building blocks shared by the classical and quantum sides.

pub mod fit;
pub mod quad;
pub mod tridiag;
