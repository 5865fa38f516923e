//! Numerical Weierstrass and spinor representations of conformal immersions
//! of planar domains into R^3.

pub mod config;
pub mod error;
pub mod exec;
pub mod expr;
pub mod geometry;
pub mod immersion;
pub mod mesh;
pub mod paths;
pub mod spinor;
pub mod weierstrass;

pub use error::{Error, Result};
pub use expr::{parse, ComplexExpr};
