//! Finite-level models of congruence subgroups of `SL_2(Z_p)`, the coset
//! module `F_p[G/H(p^k)]` with its Mahler filtration, integral symmetric
//! powers, truncated Iwasawa algebras, and exact coinvariant computations.

pub mod arith;
pub mod coinvariants;
pub mod congruence;
pub mod coset;
pub mod error;
pub mod group;
pub mod iwasawa;
pub mod linalg;
pub mod report;
pub mod sympow;

pub use error::{Error, Result};
