//! Exact arithmetic: rationals, polynomials over Z, Q and F_p, and certified
//! real and complex enclosures.

pub mod fp;
pub mod interval;
pub mod poly;
pub mod rational;

pub use fp::{factor_mod_p, factor_z_mod_p, is_prime, FpPoly};
pub use poly::{Poly, QPoly, ZPoly};
pub use rational::BigRat;
