//! Exact symbolic Lie point symmetry analysis of the (2+1)-dimensional
//! Kuramoto-Sivashinsky equation.

pub mod error;
pub mod exec;
pub mod expr;

pub use error::{Error, Result};
pub use exec::Exec;
pub mod jet;
pub mod prolong;
pub mod linalg;
pub mod detsolve;
pub mod liealg;
pub mod matexp;
pub mod surd;
pub mod adjflow;
pub mod optimal;
pub mod reduce;
pub mod nonclassical;
pub mod report;
