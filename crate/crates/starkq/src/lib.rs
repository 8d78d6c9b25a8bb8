//! Exact verification of Stark-type conjectures over Q for relative abelian extensions.

// index loops mirror the matrix formulas
#![allow(clippy::needless_range_loop)]

pub mod artin;
pub mod burns;
pub mod cfrac;
pub mod groupalg;
pub mod linalg;
pub mod numfield;
pub mod pipeline;
pub mod popescu;
pub mod splaces;
pub mod stark;
pub mod sunits;
