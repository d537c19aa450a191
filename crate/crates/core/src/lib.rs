//! Hexagonal multicarrier transmission (HMT) over doubly dispersive
//! channels: Gaussian-pulse lattice modem, exponential-U WSSUS channel,
//! closed-form SINR analysis of the shifted-pulse Max-SINR receiver and a
//! reproducible Monte-Carlo harness.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod hexmod;
pub mod montecarlo;
pub mod numerics;
pub mod oracle;
pub mod pulse;
pub mod selftest;

pub use error::{HmtError, Result};
