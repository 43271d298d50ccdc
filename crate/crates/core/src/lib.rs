//! Rigorous lower-bound certificates for the weak-type `(p,p)` constants of
//! the centered Hardy–Littlewood maximal operator under radial,
//! radially decreasing measures on `R^d`.
//!
//! Every measure is carried as a [`specfun::LogValue`] so that constructions
//! remain finite at `d` in the thousands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod quadrature;
pub mod radial;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::LogValue;
