//! Per-user achievable rate under non-Gaussian inter-cell interference.

mod kurtosis;
mod mi;
mod mixture;

pub use kurtosis::excess_kurtosis;
pub use mi::{estimate_mi, mutual_information, shannon_bits, user_rate, MiEstimate};
pub use mixture::{
    select_aggressors, AggressorSelection, FactoredInterference, InterferenceMixture, InterferenceModel,
    Interferer, MixtureComponent, DEFAULT_AGGRESSOR_CAP,
};

use serde::Serialize;

use crate::modem::Modulation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSample {
    pub ue: usize,
    pub modulation: Modulation,
    /// Bits per symbol block.
    pub mi_bits: f64,
    pub rate_bps: f64,
    pub sinr_db: f64,
    pub aggressors: usize,
}
