//! HERA and Rubato keystream generation, plus a cycle-level model of a
//! keystream accelerator.

pub mod cipher;
pub mod error;
pub mod pipesim;
pub mod sampler;
pub mod selftest;
pub mod zq;

pub use error::{Error, Result};
pub use zq::{Modulus, ZqElement};
