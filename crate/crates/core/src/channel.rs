//! Link budget: path loss, log-normal shadowing, per-tone Rayleigh fading
//! and thermal noise.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{substream, Stream};

pub const BOLTZMANN: f64 = 1.380649e-23;

/// Distances below this are evaluated at this distance.
pub const MIN_PATH_LOSS_DISTANCE_M: f64 = 35.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

/// Thermal noise power `k_B * T * B` in watts.
pub fn noise_power(temperature_k: f64, bandwidth_hz: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    /// Independent Rayleigh coefficient on every tone.
    #[default]
    Independent,
    /// One Rayleigh coefficient shared by all tones of the block.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelModel {
    /// Path loss at 1 km, dB.
    pub pl_intercept_db: f64,
    /// Path-loss slope per decade of distance, dB.
    pub pl_slope_db: f64,
    pub shadowing_sigma_db: f64,
    pub fading: FadingMode,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            pl_intercept_db: 128.1,
            pl_slope_db: 37.6,
            shadowing_sigma_db: 8.0,
            fading: FadingMode::Independent,
        }
    }
}

impl ChannelModel {
    pub fn path_loss(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(MIN_PATH_LOSS_DISTANCE_M);
        self.pl_intercept_db + self.pl_slope_db * (d / 1000.0).log10()
    }
}

/// Macro-cell path loss `128.1 + 37.6 log10(d / 1 km)` in dB.
pub fn path_loss(distance_m: f64) -> f64 {
    ChannelModel::default().path_loss(distance_m)
}

/// Identifies a link for sub-stream derivation. Shadowing is keyed on the
/// (site, receiver) pair; fast fading on the (transmitter, receiver) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkKey {
    pub site: usize,
    pub tx: usize,
    pub rx: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRealization {
    pub key: LinkKey,
    pub path_loss_db: f64,
    pub shadowing_db: f64,
    pub tx_gain_db: f64,
    /// Unit-mean-power fading coefficient per tone.
    pub fading: Vec<Complex64>,
}

impl LinkRealization {
    /// Linear power gain excluding fast fading.
    pub fn large_scale_gain(&self) -> f64 {
        db_to_linear(self.tx_gain_db - self.path_loss_db + self.shadowing_db)
    }

    pub fn tone_power_gain(&self, tone: usize) -> f64 {
        self.large_scale_gain() * self.fading[tone].norm_sqr()
    }

    /// Composite power gain averaged over the tones of the block.
    pub fn mean_power_gain(&self) -> f64 {
        let f: f64 = self.fading.iter().map(|h| h.norm_sqr()).sum::<f64>() / self.fading.len() as f64;
        self.large_scale_gain() * f
    }

    /// Complex amplitude gain on one tone.
    pub fn amplitude(&self, tone: usize) -> Complex64 {
        self.fading[tone] * self.large_scale_gain().sqrt()
    }
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draw one link. The result depends only on `(seed, key)` and the inputs.
pub fn draw_link(
    model: &ChannelModel,
    key: LinkKey,
    distance_m: f64,
    tx_gain_db: f64,
    tones: usize,
    seed: u64,
) -> LinkRealization {
    let mut shadow_rng = substream(seed, Stream::Shadowing, &[key.site as u64, key.rx as u64]);
    let z: f64 = shadow_rng.sample(StandardNormal);
    let mut fade_rng = substream(seed, Stream::Fading, &[key.tx as u64, key.rx as u64]);
    let fading = match model.fading {
        FadingMode::Independent => (0..tones).map(|_| complex_gaussian(&mut fade_rng)).collect(),
        FadingMode::Flat => vec![complex_gaussian(&mut fade_rng); tones],
    };
    LinkRealization {
        key,
        path_loss_db: model.path_loss(distance_m),
        shadowing_db: model.shadowing_sigma_db * z,
        tx_gain_db,
        fading,
    }
}

/// `S / (sum I + N)` from received powers in watts.
pub fn sinr_from_powers(signal_w: f64, interference_w: &[f64], noise_w: f64) -> f64 {
    let denom = interference_w.iter().sum::<f64>() + noise_w;
    if signal_w == 0.0 {
        0.0
    } else {
        signal_w / denom
    }
}

/// Mean SINR with every interferer at full transmit power. Each link is
/// paired with its transmit power in watts.
pub fn mean_sinr(serving: (&LinkRealization, f64), interferers: &[(&LinkRealization, f64)], noise_w: f64) -> f64 {
    let i: Vec<f64> = interferers.iter().map(|(l, p)| l.mean_power_gain() * p).collect();
    sinr_from_powers(serving.0.mean_power_gain() * serving.1, &i, noise_w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn path_loss_reference_points() {
        assert_abs_diff_eq!(path_loss(1000.0), 128.1, epsilon = 1e-12);
        assert_abs_diff_eq!(path_loss(100.0), 90.5, epsilon = 1e-12);
        assert_abs_diff_eq!(path_loss(866.0), 125.7512, epsilon = 1e-3);
    }

    #[test]
    fn noise_reference_points() {
        let n = noise_power(300.0, 20e6);
        assert_relative_eq!(n, 8.28e-14, max_relative = 1e-3);
        assert_abs_diff_eq!(watts_to_dbm(n), -100.8, epsilon = 0.05);
        assert_eq!(noise_power(300.0, 0.0), 0.0);
        assert_relative_eq!(noise_power(300.0, 40e6), 2.0 * n, max_relative = 1e-15);
    }

    #[test]
    fn power_conversions() {
        assert_abs_diff_eq!(dbm_to_watts(43.0), 19.95, epsilon = 0.01);
        for db in [-130.0, -3.0, 0.0, 17.5, 43.0] {
            assert_relative_eq!(linear_to_db(db_to_linear(db)), db, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn sinr_arithmetic() {
        let snr = sinr_from_powers(1e-12 * 20.0, &[], 8.28e-14);
        assert_relative_eq!(snr, 241.5, max_relative = 1e-3);
        assert_abs_diff_eq!(linear_to_db(snr), 23.8, epsilon = 0.05);
        let half = sinr_from_powers(1e-12 * 20.0, &[8.28e-14], 8.28e-14);
        assert_relative_eq!(half, snr / 2.0, max_relative = 1e-12);
        assert_eq!(sinr_from_powers(0.0, &[1.0], 1.0), 0.0);
    }

    #[test]
    fn draws_are_deterministic() {
        let m = ChannelModel::default();
        let k = LinkKey { site: 1, tx: 3, rx: 4 };
        let a = draw_link(&m, k, 500.0, 3.0, 4, 99);
        let b = draw_link(&m, k, 500.0, 3.0, 4, 99);
        assert_eq!(a, b);
        let c = draw_link(&m, LinkKey { tx: 2, ..k }, 500.0, 3.0, 4, 99);
        assert_eq!(a.shadowing_db, c.shadowing_db);
        assert_ne!(a.fading, c.fading);
        let flat = draw_link(&ChannelModel { fading: FadingMode::Flat, ..m }, k, 500.0, 3.0, 4, 99);
        assert!(flat.fading.iter().all(|h| *h == flat.fading[0]));
    }

    #[test]
    fn fading_and_shadowing_statistics() {
        let m = ChannelModel::default();
        let n = 100_000;
        let mut power = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for rx in 0..n {
            let l = draw_link(&m, LinkKey { site: 0, tx: 0, rx }, 500.0, 0.0, 1, 3);
            power += l.fading[0].norm_sqr();
            s1 += l.shadowing_db;
            s2 += l.shadowing_db * l.shadowing_db;
        }
        let nf = n as f64;
        assert_abs_diff_eq!(power / nf, 1.0, epsilon = 0.02);
        let mean = s1 / nf;
        let std = (s2 / nf - mean * mean).sqrt();
        assert_abs_diff_eq!(std, 8.0, epsilon = 0.1);
    }

    #[test]
    fn mean_sinr_uses_tone_average() {
        let l = LinkRealization {
            key: LinkKey { site: 0, tx: 0, rx: 0 },
            path_loss_db: 100.0,
            shadowing_db: 0.0,
            tx_gain_db: 0.0,
            fading: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        };
        assert_relative_eq!(l.mean_power_gain(), 0.5e-10, max_relative = 1e-12);
        let s = mean_sinr((&l, 2.0), &[(&l, 1.0)], 0.0);
        assert_relative_eq!(s, 2.0, max_relative = 1e-12);
    }
}
