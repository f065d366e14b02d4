//! Numerical kernels for gravitational resonance spectroscopy of ultracold
//! neutrons bouncing above a mirror, excited by the oscillating magnetic field
//! gradient of a square-wire array.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. The pieces are:
//!
//! * [`airy`] and [`bouncer`]: the quantum-bouncer eigensystem, transition
//!   frequencies, position matrix elements and step-preparation populations.
//! * [`magnetics`]: closed-form field of an infinitely long square conductor
//!   and its superposition over a periodically driven wire array.
//! * [`spin`]: Bloch-equation spin transport in the neutron rest frame.
//! * [`transitions`]: the driven multi-level Schrödinger problem, resonance
//!   curves, peak finding and frequency extraction.
//!
//! Sweeps are expressed against the [`exec::Executor`] trait so a host crate can
//! supply a thread pool; results never depend on the executor.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod airy;
pub mod bouncer;
pub mod constants;
pub mod error;
pub mod exec;
pub mod magnetics;
pub mod ode;
pub mod quadrature;
pub mod spin;
pub mod transitions;
pub mod velocity;

pub use bouncer::BouncerSpectrum;
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use magnetics::{FieldSample, WireArrayConfig};
pub use velocity::VelocitySpectrum;
