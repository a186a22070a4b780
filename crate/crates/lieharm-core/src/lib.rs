//! Symbol calculus for systems of left-invariant differential operators on
//! `G = T^r x (S^3)^s`: dual enumeration, an operator-definition language,
//! exact/float matrix symbols, Fourier-coefficient fields, global
//! hypoellipticity and solvability analysis with structural certificates,
//! frequency-by-frequency solvers, and an independent Wigner-matrix oracle.

pub mod analysis;
pub mod coeffs;
pub mod duals;
pub mod error;
pub mod exact;
pub mod opalg;
pub mod oracle;
pub mod solve;
pub mod symbols;

pub use duals::{Frequency, GroupSpec, MultiIndex};
pub use error::LieharmError;
pub use exact::{GaussRational, SurdScalar};
pub use opalg::{format_system, parse_system, OperatorExpr, SystemDef};
