//! Numerical toolkit for two-bubble nodal solutions of the slightly
//! subcritical spectral fractional Dirichlet problem on boxes.

pub mod bubble;
pub mod cache;
pub mod energy;
pub mod error;
pub mod expansions;
pub mod green;
pub mod grid;
pub mod images;
pub mod optimizer;
pub mod projection;
pub mod quadrature;
pub mod rate;
pub mod reduced;
pub mod reduction;
pub mod special;
pub mod spectral;
pub mod wholespace;

pub use error::{Error, Result};
