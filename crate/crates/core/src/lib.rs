//! Representation theory of the symmetric and unitary groups, a small
//! channel calculus, and circuit constructions for purifying and dilating
//! unknown states and channels from many copies.

pub mod channels;
pub mod circuits;
pub mod combinatorics;
pub mod error;
pub mod haar_oracle;
pub mod kronecker;
pub mod linalg;
pub mod schur;
pub mod symrep;

pub use error::{Error, Result};
