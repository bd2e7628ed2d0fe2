//! Squeezing transfer in a hybrid atom–cavity–mechanics system.
//!
//! A three-level atom drives a cavity mode coupled to a mechanical mode. The
//! crate builds the effective Hamiltonians and dissipators, solves for
//! steady states and transients of the Lindblad master equation, and provides
//! the semiclassical moment equations used as a closed-form reference.

pub mod dynamics;
pub mod error;
pub mod linsolve;
pub mod liouvillian;
pub mod model;
pub mod observables;
pub mod operator;
pub mod semiclassical;

pub use dynamics::{DensityMatrix, StateSpace};
pub use error::{Error, Result};
pub use liouvillian::Liouvillian;
pub use model::{Scheme, SqueezedBathParams, SystemParams};
pub use operator::{HilbertSpec, SparseMatrix, Subsystem, C64};
