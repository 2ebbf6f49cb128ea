//! Numerics for restriction estimates on finite-type curves and surfaces and
//! for the discrete nonlinear Schrödinger equation on ℤ^d.

pub mod error;
pub mod extension;
pub mod finitetype;
pub mod lattice;
pub mod quadrature;
pub mod analysis;
pub mod dnls;
pub mod qmc;

pub use error::{Error, Result};

/// The chapters of the guide in `book/`, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/lattice.md")]
    pub struct Lattice;
    #[doc = include_str!("../../../book/src/finitetype.md")]
    pub struct FiniteType;
    #[doc = include_str!("../../../book/src/extension.md")]
    pub struct Extension;
    #[doc = include_str!("../../../book/src/analysis.md")]
    pub struct Analysis;
    #[doc = include_str!("../../../book/src/dnls.md")]
    pub struct Dnls;
}
