//! Electron–nuclear entangling gates driven by dynamical-decoupling sequences.
//!
//! The crate models one electron spin and any number of independent
//! nuclear spins. Every nuclear spin evolves under one of two generators,
//! `h0` or `h1`, depending on the electron state, which instantaneous
//! π-pulses toggle. The resulting branch pair `(u0, u1)` drives everything
//! else: resonance conditions, gate synthesis, coherence and selectivity.
//!
//! Internal units are SI with angular frequencies in rad/s.

pub mod coherence;
pub mod error;
pub mod exec;
pub mod filter;
pub mod gate;
pub mod io;
pub mod optimize;
pub mod resonance;
pub mod sequence;
pub mod spin;
pub mod su2;

pub use error::{DdError, Result};
pub use exec::Exec;
