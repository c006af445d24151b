//! Numerical evaluation on `ℝⁿ` with a trivial bundle: parallel transport
//! along sampled loops, Chen iterated integrals of matrix-valued forms and
//! the Gauss linking integral of a framed loop.
//!
//! Transport follows the convention `H|_s^t`: the transport from `γ(t)` to
//! `γ(s)`, solving `dH/dt = H · A(γ̇)`. The holonomy `H|_0^1` is therefore
//! the inverse of the usual path-ordered exponential.

pub mod config;
pub mod curve;
pub mod error;
pub mod form;
pub mod iterated;
pub mod linking;
pub mod sum;
pub mod transport;

pub use config::Tolerances;
pub use curve::LoopCurve;
pub use error::{NumericError, Result};
pub use form::{index_sets, ConnectionSample, FlagCheck, Mat, MatrixForm};
pub use iterated::{chen_integral, deformation_field, iterated_integral, slot_integral, Direction, Quadrature, SlotFn};
pub use linking::{linking_integral, linking_with, LinkingResult};
pub use transport::{holonomy, parallel_transport, Transport};
