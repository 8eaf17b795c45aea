//! Exact arithmetic for maximal tori of GL_n and SL_n over Q: S-ampleness
//! certificates, (S-)unit groups and generator matrices of the associated
//! commensurably maximal amenable subgroups.

pub mod arith;
pub mod cli;
pub mod error;
pub mod etale;
pub mod galois;
pub mod groups;
pub mod linalg;
pub mod pipeline;
pub mod torus;
pub mod units;

pub use error::{Error, Result};
