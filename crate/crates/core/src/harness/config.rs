use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::error::{Result, SimError};
use crate::rate::DEFAULT_AGGRESSOR_CAP;
use crate::scheduler::{ServiceProfile, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Space,
    Frequency,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::Space => f.write_str("space"),
            Scenario::Frequency => f.write_str("frequency"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[serde(alias = "all-qam")]
    AllQam,
    Hybrid,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::AllQam => f.write_str("all_qam"),
            Mode::Hybrid => f.write_str("hybrid"),
        }
    }
}

/// How QAM interferers enter the victim likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QamInterference {
    /// Gaussian of matched power.
    #[default]
    Gaussian,
    /// Enumerated like FQAM aggressors (single-tone victims only).
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FqamConfig {
    pub m_f: usize,
    pub m_q: usize,
}

impl Default for FqamConfig {
    fn default() -> Self {
        Self { m_f: 4, m_q: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QamConfig {
    pub m_q: usize,
}

impl Default for QamConfig {
    fn default() -> Self {
        Self { m_q: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub gamma_th_db: f64,
    pub n_th: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self { gamma_th_db: 3.0, n_th: 4 }
    }
}

impl From<ThresholdConfig> for Thresholds {
    fn from(t: ThresholdConfig) -> Self {
        Thresholds { gamma_th_db: t.gamma_th_db, n_th: t.n_th }
    }
}

/// Service profile defaults, with optional overrides for cell-edge users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub lspl: u32,
    pub rm: f64,
    pub edge_lspl: Option<u32>,
    pub edge_rm: Option<f64>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let d = ServiceProfile::default();
        Self { lspl: d.lspl, rm: d.rm, edge_lspl: None, edge_rm: None }
    }
}

impl ServiceConfig {
    pub fn profile(&self, cell_edge: bool) -> ServiceProfile {
        if cell_edge {
            ServiceProfile { lspl: self.edge_lspl.unwrap_or(self.lspl), rm: self.edge_rm.unwrap_or(self.rm) }
        } else {
            ServiceProfile { lspl: self.lspl, rm: self.rm }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub n_drops: u64,
    pub mi_samples: usize,
    pub seed: u64,
    pub bootstrap_resamples: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_drops: 1000, mi_samples: 256, seed: 1, bootstrap_resamples: 1000 }
    }
}

/// Full simulation configuration. Every key is optional in the config file;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub mode: Mode,
    pub n_cells: usize,
    /// Inter-site distance, m.
    pub isd: f64,
    pub bs_power_dbm: f64,
    /// Bandwidth allocated to each user, Hz.
    pub ue_bandwidth: f64,
    /// Total band split into reserved and regular subbands (frequency
    /// scenario), Hz.
    pub system_bandwidth: f64,
    pub users_per_cell: usize,
    /// Kelvin.
    pub noise_temperature: f64,
    /// Half-power beamwidth in radians; 2pi or more selects omni mode.
    pub beam_phi_3db: f64,
    pub omni_gain_db: f64,
    pub fqam: FqamConfig,
    pub qam: QamConfig,
    pub thresholds: ThresholdConfig,
    pub service: ServiceConfig,
    /// Reserved-subband fraction.
    pub rho: f64,
    pub aggressor_cap: usize,
    /// Interferers within this many dB of the strongest one (and above the
    /// noise floor) count as aggressors.
    pub aggressor_window_db: f64,
    pub qam_interference: QamInterference,
    pub channel: ChannelModel,
    pub mc: McConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Space,
            mode: Mode::Hybrid,
            n_cells: 21,
            isd: 1732.0,
            bs_power_dbm: 43.0,
            ue_bandwidth: 20e6,
            system_bandwidth: 40e6,
            users_per_cell: 2,
            noise_temperature: 300.0,
            beam_phi_3db: PI / 4.0,
            omni_gain_db: 14.0,
            fqam: FqamConfig::default(),
            qam: QamConfig::default(),
            thresholds: ThresholdConfig::default(),
            service: ServiceConfig::default(),
            rho: 0.5,
            aggressor_cap: DEFAULT_AGGRESSOR_CAP,
            aggressor_window_db: 10.0,
            qam_interference: QamInterference::Gaussian,
            channel: ChannelModel::default(),
            mc: McConfig::default(),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must be finite, got {v}")))
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells == 0 {
            return Err(SimError::config("n_cells", "must be at least 1"));
        }
        positive("isd", self.isd)?;
        finite("bs_power_dbm", self.bs_power_dbm)?;
        positive("ue_bandwidth", self.ue_bandwidth)?;
        positive("system_bandwidth", self.system_bandwidth)?;
        if self.users_per_cell == 0 {
            return Err(SimError::config("users_per_cell", "must be at least 1"));
        }
        positive("noise_temperature", self.noise_temperature)?;
        if !(self.beam_phi_3db > 0.0 && self.beam_phi_3db <= TAU) {
            return Err(SimError::config("beam_phi_3db", format!("must lie in (0, 2pi], got {}", self.beam_phi_3db)));
        }
        finite("omni_gain_db", self.omni_gain_db)?;
        if self.fqam.m_f < 2 || !self.fqam.m_f.is_power_of_two() {
            return Err(SimError::config("fqam.m_f", format!("must be a power of two >= 2, got {}", self.fqam.m_f)));
        }
        for (key, m) in [("fqam.m_q", self.fqam.m_q), ("qam.m_q", self.qam.m_q)] {
            if ![2, 4, 16, 64].contains(&m) {
                return Err(SimError::config(key, format!("unsupported QAM order {m}")));
            }
        }
        finite("thresholds.gamma_th_db", self.thresholds.gamma_th_db)?;
        if self.thresholds.n_th == 0 {
            return Err(SimError::config("thresholds.n_th", "must be at least 1"));
        }
        for (key, rm) in [("service.rm", Some(self.service.rm)), ("service.edge_rm", self.service.edge_rm)] {
            if let Some(rm) = rm {
                if !(0.0..=1.0).contains(&rm) {
                    return Err(SimError::config(key, format!("must lie in [0, 1], got {rm}")));
                }
            }
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(SimError::config("rho", format!("must lie in (0, 1), got {}", self.rho)));
        }
        if self.aggressor_window_db < 0.0 || !self.aggressor_window_db.is_finite() {
            return Err(SimError::config("aggressor_window_db", "must be non-negative and finite"));
        }
        finite("channel.pl_intercept_db", self.channel.pl_intercept_db)?;
        finite("channel.pl_slope_db", self.channel.pl_slope_db)?;
        if self.channel.shadowing_sigma_db < 0.0 || !self.channel.shadowing_sigma_db.is_finite() {
            return Err(SimError::config("channel.shadowing_sigma_db", "must be non-negative and finite"));
        }
        if self.mc.n_drops == 0 {
            return Err(SimError::config("mc.n_drops", "must be at least 1"));
        }
        if self.mc.mi_samples == 0 {
            return Err(SimError::config("mc.mi_samples", "must be at least 1"));
        }
        if self.mc.bootstrap_resamples == 0 {
            return Err(SimError::config("mc.bootstrap_resamples", "must be at least 1"));
        }
        Ok(())
    }
}

/// Read a TOML config file. An empty file yields the defaults.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    SimConfig::from_toml_str(&text)
}
