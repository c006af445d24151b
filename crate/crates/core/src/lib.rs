//! Symbolic core for graded BF-type field theories: a bigraded expression IR
//! over (form degree, ghost number), the BV structure of the theory and the
//! algebra of Wilson-loop type observables built from it.

pub mod coeff;
pub mod error;
pub mod expr;
pub mod gl2;
pub mod grading;
pub mod sexpr;
pub mod stokes;
pub mod bv;
pub mod loops;

pub use coeff::{Coeff, Q};
pub use error::{CoreError, Result};
pub use expr::{Factor, GExpr, LeibnizMode, Local, Shape, Word};
pub use grading::{Generator, Grading, Kind};
