//! Exact integer linear algebra: determinants, minors, Hermite bases of
//! lattices and Smith-form quotient groups.

mod lattice;
mod matrix;
mod minors;

pub use lattice::{
    lattice_member, lattice_of_columns, quotient, LatticeBasis, QuotientGroup, ResidueId,
};
pub use matrix::{determinant, int_vec, IntMatrix, RationalVector};
pub use minors::{gram_determinant, minor_summary, MinorSummary};
