//! Link-level simulation of turbo-coded 3x3 MIMO-OFDM transmission over
//! medium-voltage underground power cables.

pub mod cable_channel;
pub mod error;
pub mod link_sim;
pub mod mimo_rx;
pub mod noise;
pub mod ofdm;
pub mod turbo;

pub use error::{Error, Result};
