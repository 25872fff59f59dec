//! QAM and FQAM constellations.
//!
//! An (M_F, M_Q)-FQAM symbol selects one of `M_F` tones and places an
//! `M_Q`-ary QAM value on it; every other tone in the block is silent. Pure
//! QAM is the `M_F = 1` case. Constellations are normalized to unit mean
//! energy per symbol; transmit power is applied by the link budget.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Modulation family used by a beam, cell or user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Qam,
    Fqam,
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Modulation::Qam => f.write_str("qam"),
            Modulation::Fqam => f.write_str("fqam"),
        }
    }
}

/// A constellation point: the active tone and the complex value carried on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TonePoint {
    pub tone: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    m_f: usize,
    m_q: usize,
    /// Indexed by label.
    points: Vec<TonePoint>,
}

const SUPPORTED_QAM: [usize; 4] = [2, 4, 16, 64];

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Gray-labeled square QAM (or BPSK for `m_q = 2`) with unit mean energy.
fn qam_values(m_q: usize) -> Result<Vec<Complex64>> {
    if !SUPPORTED_QAM.contains(&m_q) {
        return Err(SimError::config(
            "m_q",
            format!("unsupported QAM order {m_q} (supported: 2, 4, 16, 64)"),
        ));
    }
    if m_q == 2 {
        return Ok(vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    let half_bits = m_q.trailing_zeros() as usize / 2;
    let side = 1usize << half_bits;
    let scale = (2.0 * (m_q as f64 - 1.0) / 3.0).sqrt();
    let level = |idx: usize| (2.0 * idx as f64 - (side as f64 - 1.0)) / scale;
    Ok((0..m_q)
        .map(|label| {
            let i = gray_to_binary(label >> half_bits);
            let q = gray_to_binary(label & (side - 1));
            Complex64::new(level(i), level(q))
        })
        .collect())
}

/// Square QAM with Gray labels and `M_F = 1`.
pub fn build_qam(m_q: usize) -> Result<Constellation> {
    build_fqam(1, m_q)
}

/// (M_F, M_Q)-FQAM. Label bits are the tone index in natural binary followed
/// by the Gray-coded QAM bits.
pub fn build_fqam(m_f: usize, m_q: usize) -> Result<Constellation> {
    if m_f == 0 || !m_f.is_power_of_two() {
        return Err(SimError::config(
            "m_f",
            format!("tone count {m_f} is not a power of two"),
        ));
    }
    let qam = qam_values(m_q)?;
    let points = (0..m_f)
        .flat_map(|tone| qam.iter().map(move |&value| TonePoint { tone, value }))
        .collect();
    Ok(Constellation { m_f, m_q, points })
}

impl Constellation {
    pub fn m_f(&self) -> usize {
        self.m_f
    }

    pub fn m_q(&self) -> usize {
        self.m_q
    }

    /// Modulation order `M = M_F * M_Q`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order().trailing_zeros() as usize
    }

    pub fn modulation(&self) -> Modulation {
        if self.m_f == 1 {
            Modulation::Qam
        } else {
            Modulation::Fqam
        }
    }

    pub fn points(&self) -> &[TonePoint] {
        &self.points
    }

    pub fn point(&self, label: usize) -> TonePoint {
        self.points[label]
    }

    /// Dense tone-domain vector for `label`.
    pub fn symbol_vector(&self, label: usize) -> Vec<Complex64> {
        let p = self.points[label];
        let mut v = vec![Complex64::new(0.0, 0.0); self.m_f];
        v[p.tone] = p.value;
        v
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.value.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, pa) in self.points.iter().enumerate() {
            for pb in &self.points[a + 1..] {
                let d = if pa.tone == pb.tone {
                    (pa.value - pb.value).norm_sqr()
                } else {
                    pa.value.norm_sqr() + pb.value.norm_sqr()
                };
                best = best.min(d);
            }
        }
        best.sqrt()
    }

    /// Bits per tone carried by one symbol: `log2(M) / M_F`.
    pub fn per_tone_spectral_efficiency(&self) -> f64 {
        self.bits_per_symbol() as f64 / self.m_f as f64
    }

    pub fn label_from_bits(&self, bits: &[u8]) -> Result<usize> {
        let n = self.bits_per_symbol();
        if bits.len() != n {
            return Err(SimError::Usage(format!(
                "expected {n} bits per symbol, got {}",
                bits.len()
            )));
        }
        bits.iter().try_fold(0usize, |acc, &b| match b {
            0 | 1 => Ok((acc << 1) | b as usize),
            other => Err(SimError::Usage(format!("bit value {other} is not 0 or 1"))),
        })
    }

    pub fn bits_from_label(&self, label: usize) -> Vec<u8> {
        let n = self.bits_per_symbol();
        (0..n).rev().map(|i| ((label >> i) & 1) as u8).collect()
    }

    /// Map an `N`-bit string to its tone-domain symbol vector.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        Ok(self.symbol_vector(self.label_from_bits(bits)?))
    }

    /// Minimum-distance detection; ties go to the lowest label.
    pub fn detect_label(&self, y: &[Complex64], noise_var: f64) -> Result<usize> {
        if y.len() != self.m_f {
            return Err(SimError::Usage(format!(
                "received vector has {} tones, constellation has {}",
                y.len(),
                self.m_f
            )));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(SimError::Usage(format!(
                "noise variance must be positive and finite, got {noise_var}"
            )));
        }
        let energy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let mut best = (f64::INFINITY, 0usize);
        for (label, p) in self.points.iter().enumerate() {
            // |y - x|^2 with x one-hot on p.tone
            let d = energy - y[p.tone].norm_sqr() + (y[p.tone] - p.value).norm_sqr();
            if d < best.0 {
                best = (d, label);
            }
        }
        Ok(best.1)
    }

    pub fn ml_detect(&self, y: &[Complex64], noise_var: f64) -> Result<Vec<u8>> {
        Ok(self.bits_from_label(self.detect_label(y, noise_var)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn qpsk_points() {
        let c = build_qam(4).unwrap();
        let a = 1.0 / 2f64.sqrt();
        assert_eq!(c.order(), 4);
        for p in c.points() {
            assert_abs_diff_eq!(p.value.re.abs(), a, epsilon = 1e-15);
            assert_abs_diff_eq!(p.value.im.abs(), a, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(c.mean_energy(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn qam16_grid() {
        let c = build_qam(16).unwrap();
        // unscaled {±1,±3}^2 grid has mean energy 10
        let raw: f64 = [-3.0f64, -1.0, 1.0, 3.0]
            .iter()
            .flat_map(|&i| [-3.0f64, -1.0, 1.0, 3.0].map(move |q| i * i + q * q))
            .sum::<f64>()
            / 16.0;
        assert_abs_diff_eq!(raw, 10.0, epsilon = 1e-12);
        let s = 10f64.sqrt();
        for p in c.points() {
            for coord in [p.value.re * s, p.value.im * s] {
                let r = coord.round();
                assert_abs_diff_eq!(coord, r, epsilon = 1e-12);
                assert!([-3.0, -1.0, 1.0, 3.0].contains(&r));
            }
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        let c = build_qam(16).unwrap();
        let d = c.min_distance();
        for a in 0..16 {
            for b in 0..16 {
                let dist = (c.point(a).value - c.point(b).value).norm();
                if (dist - d).abs() < 1e-9 {
                    assert_eq!((a ^ b).count_ones(), 1, "labels {a} {b}");
                }
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        assert!(matches!(build_qam(3), Err(SimError::Config { .. })));
        let msg = build_qam(8).unwrap_err().to_string();
        assert!(msg.contains('8'));
        assert!(build_fqam(3, 4).is_err());
        assert!(build_fqam(0, 4).is_err());
    }

    #[test]
    fn fqam_sizes() {
        let c = build_fqam(4, 4).unwrap();
        assert_eq!(c.order(), 16);
        assert_eq!(c.bits_per_symbol(), 4);
        let c = build_fqam(2, 2).unwrap();
        assert_eq!(c.order(), 4);
        assert_eq!(c.bits_per_symbol(), 2);
        for label in 0..4 {
            let v = c.symbol_vector(label);
            assert_eq!(v.iter().filter(|z| z.norm() > 0.0).count(), 1);
            assert_eq!(v.iter().find(|z| z.norm() > 0.0).unwrap().im, 0.0);
        }
    }

    #[test]
    fn modulate_one_hot_and_roundtrip() {
        let c = build_fqam(4, 4).unwrap();
        let v = c.modulate(&[0, 0, 0, 0]).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert_eq!(v[0], c.point(0).value);
        assert!(c.modulate(&[0, 1]).is_err());
        assert!(c.modulate(&[0, 1, 2, 0]).is_err());
    }

    #[test]
    fn label_layout_is_tone_then_qam() {
        let c = build_fqam(4, 16).unwrap();
        let qam = build_qam(16).unwrap();
        // label 0b10_0110: tone 2, QAM label 6
        let p = c.point(0b10_0110);
        assert_eq!(p.tone, 2);
        assert_eq!(p.value, qam.point(0b0110).value);
    }

    #[test]
    fn detect_exact_points_and_ties() {
        let c = build_qam(4).unwrap();
        for label in 0..4 {
            let y = c.symbol_vector(label);
            assert_eq!(c.detect_label(&y, 1e-3).unwrap(), label);
        }
        // midpoint of two neighbours
        for a in 0..4 {
            for b in 0..4 {
                let (pa, pb) = (c.point(a).value, c.point(b).value);
                if a != b && ((pa - pb).norm() - c.min_distance()).abs() < 1e-12 {
                    let mid = (pa + pb) / 2.0;
                    assert_eq!(c.detect_label(&[mid], 1.0).unwrap(), a.min(b));
                }
            }
        }
        assert!(c.detect_label(&[Complex64::new(0.0, 0.0); 2], 1.0).is_err());
        assert!(c.detect_label(&[Complex64::new(0.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn spectral_efficiency() {
        assert_eq!(build_qam(16).unwrap().per_tone_spectral_efficiency(), 4.0);
        assert_eq!(build_fqam(4, 4).unwrap().per_tone_spectral_efficiency(), 1.0);
        assert_eq!(build_fqam(4, 16).unwrap().per_tone_spectral_efficiency(), 1.5);
    }

    /// Q(x) = 0.5 erfc(x / sqrt 2) bounded via the Chernoff-style tail
    /// Q(x) <= exp(-x^2/2)/2. QPSK SER <= 2 Q(sqrt(Es/N0)).
    #[test]
    fn qpsk_ser_high_snr() {
        let c = build_qam(4).unwrap();
        let es_n0 = 10f64.powf(3.0);
        let n0 = 1.0 / es_n0;
        let sigma = (n0 / 2.0).sqrt();
        let x = es_n0.sqrt();
        let bound = 2.0 * 0.5 * (-x * x / 2.0).exp();
        assert!(bound < 1e-4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mut errors = 0;
        for t in 0..trials {
            let label = t % 4;
            let nr: f64 = rng.sample(StandardNormal);
            let ni: f64 = rng.sample(StandardNormal);
            let y = c.point(label).value + Complex64::new(nr * sigma, ni * sigma);
            if c.detect_label(&[y], n0).unwrap() != label {
                errors += 1;
            }
        }
        assert!((errors as f64 / trials as f64) < 1e-4);
    }
}
