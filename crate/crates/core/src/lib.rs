//! Singular fractional g-Laplacian problems on (-1, 1): Young-function
//! calculus, discrete Orlicz modulars, a nonlocal operator discretization,
//! the monotone approximation scheme and an inequality verification suite.

pub mod cli;
pub mod config;
pub mod error;
pub mod mesh;
pub mod nonlocal;
pub mod orlicz;
pub mod quad;
pub mod solver;
pub mod verify;
pub mod young;

pub use error::{Error, Result};
pub use mesh::{GridFunction, Mesh};
pub use nonlocal::{Discretization, OperatorConfig, TailMode};
pub use young::{Family, PhiWeight, YoungFunction};
