//! Binary coherent-state discrimination receivers.
//!
//! * [`statemath`]: Helstrom bound, Kennedy and constant-feedback closed forms.
//! * [`multicopy`]: adaptive local measurement of `n` identical qubit copies.
//! * [`rootfind`]: bracketed solvers and the optimal constant displacements.
//! * [`dolinar`]: the continuous-time photon-counting feedback receiver.
//! * [`sweep`]: error-probability and displacement sweeps.
//!
//! Monte Carlo and enumeration loops run on rayon when the `parallel`
//! feature is enabled (the default); see [`par::Execution`].

pub mod dolinar;
pub mod error;
pub mod multicopy;
pub mod ode;
pub mod par;
pub mod rootfind;
pub mod statemath;
pub mod sweep;

pub use error::{Error, Result};
pub use par::{Estimate, Execution, MonteCarlo};
pub use statemath::{CoherentBinary, Priors, QubitPair};
