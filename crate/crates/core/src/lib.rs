//! Entanglement between a driven V-type three-level atom and its spontaneous
//! emission field, with spontaneously generated coherence between the two
//! excited levels.
//!
//! The atom is described by its reduced density matrix; the degree of
//! atom-photon entanglement is its von Neumann entropy. Modules, bottom up:
//!
//! * [`state`]: density matrices, Hermitian eigen-decomposition, entropy.
//! * [`dynamics`]: equations of motion and fixed-step RK4 integration.
//! * [`steadystate`]: stationary states, degeneracy detection, the weak-field
//!   closed form.
//! * [`dressed`]: the symmetric/antisymmetric excited-state basis and the
//!   non-stationary special case.
//! * [`sweep`]: parameter grids and figure presets.
//! * [`cli`]: configuration, CSV output and the `vee-sgc` commands.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod deviations;
pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod selftest;
pub mod state;
pub mod steadystate;
pub mod sweep;

pub use error::{Error, Result};
