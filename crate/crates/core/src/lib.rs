//! Pseudospectral solver for the free-surface boundary system of rotational
//! gravity water waves on a doubly periodic box.
//!
//! The evolved unknowns are the elevation `h` and the vorticity-adjusted
//! potential `φ_ω = φ + a_ω`, or equivalently the complex dispersive variable
//! `u = h + iΛ^{1/2}φ_ω`. The vorticity enters only through its surface trace
//! `V_ω`, supplied by a [`vorticity::VorticityProvider`].

pub mod diagnostics;
pub mod dtn;
pub mod dynamics;
pub mod error;
pub mod spectral;
pub mod vorticity;

pub use error::{Error, Result};
