//! Degraded Poisson wiretap channel toolkit.
//!
//! The crate covers two halves of the same problem:
//!
//! * the analytic side: secrecy capacity of a direct-detection link whose
//!   eavesdropper sees a degraded copy of the legitimate receiver's photon
//!   stream ([`capacity`]), the rate-equivocation region, and the
//!   infinite-bandwidth Gaussian comparison ([`gaussian`]);
//! * the constructive side: piecewise-constant intensity waveforms and
//!   doubly stochastic Poisson sampling ([`pointprocess`]), constant-weight
//!   Wyner codes with stochastic encoding and arrival-counting decoding
//!   ([`wyner`]), and exact small-instance leakage / Monte Carlo error
//!   estimation ([`experiment`]).
//!
//! All information quantities are in nats; rates are per unit time.

pub mod capacity;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod params;
pub mod pointprocess;
pub mod rng;
pub mod wyner;

pub use capacity::{secrecy_capacity, CapacityResult, RegionPoint};
pub use error::{Error, Result};
pub use params::ChannelParams;
