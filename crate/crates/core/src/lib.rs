//! Achievable rate regions for the two-user slowly fading Gaussian
//! multiple access channel under layered superposition coding.
//!
//! Each transmitter splits its message into one independently encoded
//! stream per joint channel state and superimposes them; the receiver,
//! which alone knows the realized gains, peels streams off in a fixed
//! successive-decoding order. The crate computes, for a finite-state
//! fading model:
//!
//! - the two-state achievable region, its grouped baseline counterpart,
//!   and a matching outer bound ([`two_state`]);
//! - the general `ℓ`-state region, decode tables, and the reduction
//!   check against the two-state forms ([`multi_state`]);
//! - exact linear maximization over the region polyhedra, frontier
//!   envelopes, and average-rate optimization over the power-allocation
//!   simplex ([`opt`]);
//! - a seeded Monte Carlo estimate of the average decoded rate that is
//!   cross-checked against the closed form ([`sim`]).
//!
//! All rates are in bits per channel use. The capacity kernel used
//! throughout is `C(x, y) = 1/2 * log2(1 + x / (y + 1/P))`, the rate of
//! a real Gaussian signal of power `x*P` under interference `y*P` and
//! unit noise.

pub mod channel;
pub mod error;
pub mod multi_state;
pub mod opt;
pub mod region;
pub mod sim;
pub mod two_state;

pub use channel::{cap_term, simplex_grid, ChannelModel, PowerAllocation, PowerMap, RateVector};
pub use error::{Error, Result};
pub use region::{Constraint, RateRegion};

/// Absolute tolerance for exact-equality assertions (simplex sums,
/// probability normalization, reduction identities).
pub const SUM_TOL: f64 = 1e-12;
