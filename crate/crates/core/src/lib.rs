//! Anisotropic quantum Rabi model in the large-Ω limit: closed-form
//! normal and superradiant phase properties, grid and Fock-basis solvers,
//! linear-quench dynamics and Kibble-Zurek scaling analysis.
// Range checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kzm;
pub mod model;
mod propagator;
pub mod solver;

pub use error::{RabiError, Result};
pub use model::{Grid, ModelParams, SpinBasis, SpinorState};
