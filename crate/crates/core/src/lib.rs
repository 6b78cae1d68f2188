//! Numerical construction of exact wave functions for a charged particle with
//! time-dependent mass in a variable magnetic field, including static `xy` and
//! dynamic `p_x p_y` couplings.
//!
//! The crate is organised bottom-up:
//!
//! * [`schedule`] and [`params`] evaluate the time-dependent coefficient chain
//!   that maps the original Hamiltonian onto two unit-mass oscillators.
//! * [`ermakov`] solves the classical mode equations and the Ermakov–Pinney
//!   auxiliary equation that sets the width of the invariant eigenstates.
//! * [`wavefunction`] evaluates invariant eigenstates and the closed-form
//!   original-frame wave functions.
//! * [`unitary`] applies the rotation/squeeze/chirp operators on grids and
//!   composes the operator pipeline, an independent route to the same state.
//! * [`invariant`] acts with the quadratic invariant on grid states.
//! * [`oracle`] propagates the Schrödinger equation directly.
//!
//! All states live on a uniform [`grid::GridSpec`] and can be written to and
//! read from the `QSTATE01` binary format in [`dump`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dump;
pub mod ermakov;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod invariant;
pub mod jet;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod schedule;
pub mod spectral;
pub mod unitary;
pub mod wavefunction;

mod interp;

pub use error::{Error, Result};
pub use grid::{GridSpec, QuantumState};
pub use num_complex::Complex64;
