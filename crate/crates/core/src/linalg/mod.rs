//! Exact linear algebra over Q and Z.

pub mod lattice;
pub mod matrix;

pub use lattice::IntMat;
pub use matrix::MatQ;
