//! Monte Carlo estimation of constellation-constrained mutual information
//! with the exact conditional likelihood.

use num_complex::Complex64;
use rand::Rng;

use super::mixture::{InterferenceMixture, InterferenceModel};
use crate::error::{Result, SimError};
use crate::modem::{Constellation, TonePoint};
use crate::rng::{substream, Stream};

/// Running mean and variance of the per-sample information terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Bits per symbol, clamped to `[0, log2 M]`.
    pub bits: f64,
    /// Unclamped sample mean.
    pub raw_mean: f64,
    /// Standard error of `raw_mean`.
    pub std_error: f64,
    pub samples: usize,
}

/// `I(X; Y)` for `Y = x + interference + noise`, `x` uniform over `points`
/// (already scaled by the serving channel). The transmitted point cycles
/// through the constellation so every point gets the same share of samples.
pub fn estimate_mi<M, R>(points: &[TonePoint], model: &M, n_samples: usize, rng: &mut R) -> Result<MiEstimate>
where
    M: InterferenceModel,
    R: Rng + ?Sized,
{
    if points.is_empty() {
        return Err(SimError::Usage("empty constellation".into()));
    }
    if n_samples == 0 {
        return Err(SimError::Usage("n_samples must be at least 1".into()));
    }
    if let Some(p) = points.iter().find(|p| p.tone >= model.tones()) {
        return Err(SimError::Usage(format!(
            "point on tone {} outside block of {}",
            p.tone,
            model.tones()
        )));
    }
    let m = points.len() as f64;
    let mut y = vec![Complex64::new(0.0, 0.0); model.tones()];
    let mut lik = vec![0.0; points.len()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for i in 0..n_samples {
        let x = points[i % points.len()];
        model.sample(rng, &mut y);
        y[x.tone] += x.value;
        model.likelihoods(&y, points, &mut lik);
        let total: f64 = lik.iter().sum();
        let own = lik[i % points.len()];
        let term = (own.max(f64::MIN_POSITIVE) * m / total).log2();
        sum += term;
        sum_sq += term * term;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = if n_samples > 1 { (sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    Ok(MiEstimate {
        bits: mean.clamp(0.0, m.log2()),
        raw_mean: mean,
        std_error: (var / n).sqrt(),
        samples: n_samples,
    })
}

/// MI of a unit-gain constellation under a flat interference mixture.
pub fn mutual_information(c: &Constellation, mix: &InterferenceMixture, n_samples: usize, seed: u64) -> Result<f64> {
    let mut rng = substream(seed, Stream::MutualInformation, &[]);
    Ok(estimate_mi(c.points(), mix, n_samples, &mut rng)?.bits)
}

/// Achievable rate in bit/s for `mi` bits per symbol spread over `m_f` tones.
pub fn user_rate(mi_bits: f64, bandwidth_hz: f64, m_f: usize) -> f64 {
    bandwidth_hz * mi_bits / m_f as f64
}

/// Gaussian-input capacity per tone, for debugging only.
pub fn shannon_bits(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::build_qam;
    use crate::rate::mixture::MixtureComponent;

    fn awgn(noise_var: f64) -> InterferenceMixture {
        InterferenceMixture::from_components(
            vec![MixtureComponent { probability: 1.0, offset: vec![Complex64::new(0.0, 0.0)] }],
            vec![noise_var],
        )
    }

    #[test]
    fn asymptotes() {
        let c = build_qam(4).unwrap();
        let low = mutual_information(&c, &awgn(1e3), 20_000, 1).unwrap();
        assert!(low < 0.01, "{low}");
        let high = mutual_information(&c, &awgn(1e-4), 2_000, 1).unwrap();
        assert!(high >= 1.99, "{high}");
    }

    #[test]
    fn user_rate_conversion() {
        assert_eq!(user_rate(4.0, 20e6, 1), 80e6);
        assert_eq!(user_rate(4.0, 20e6, 4), 20e6);
        assert_eq!(user_rate(0.0, 20e6, 4), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mix = awgn(1.0);
        let mut rng = substream(0, Stream::MutualInformation, &[]);
        assert!(estimate_mi(&[], &mix, 10, &mut rng).is_err());
        let c = build_qam(4).unwrap();
        assert!(estimate_mi(c.points(), &mix, 0, &mut rng).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let c = build_qam(16).unwrap();
        let a = mutual_information(&c, &awgn(0.3), 500, 9).unwrap();
        let b = mutual_information(&c, &awgn(0.3), 500, 9).unwrap();
        assert_eq!(a, b);
    }
}
