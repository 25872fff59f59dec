//! Downlink multi-cell simulator for QAM/FQAM resource partitioning.
//!
//! Cells either steer one beam per user and pick QAM or FQAM per beam
//! (space partitioning), or split the band into a reserved subband where
//! interfering cells switch to FQAM and a regular QAM subband (frequency
//! partitioning). User rates are constellation-constrained mutual
//! information under the exact interference mixture.

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod modem;
pub mod rate;
pub mod rng;
pub mod scheduler;

pub use error::{Result, SimError};
