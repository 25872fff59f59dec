//! Gaussianity statistic for interference-plus-noise.

use num_complex::Complex64;

use super::mixture::InterferenceModel;
use crate::error::{Result, SimError};
use crate::rng::{substream, Stream};

/// Sample excess kurtosis of the real part of the interference-plus-noise on
/// `tone`. Zero for a Gaussian; positive for impulsive interference.
pub fn excess_kurtosis<M: InterferenceModel>(model: &M, tone: usize, n_samples: usize, seed: u64) -> Result<f64> {
    if tone >= model.tones() {
        return Err(SimError::Usage(format!("tone {tone} outside block of {}", model.tones())));
    }
    if n_samples < 4 {
        return Err(SimError::Usage("excess kurtosis needs at least 4 samples".into()));
    }
    let mut rng = substream(seed, Stream::MutualInformation, &[0x6b75_7274]);
    let mut buf = vec![Complex64::new(0.0, 0.0); model.tones()];
    let xs: Vec<f64> = (0..n_samples)
        .map(|_| {
            model.sample(&mut rng, &mut buf);
            buf[tone].re
        })
        .collect();
    let n = n_samples as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
        let d2 = (x - mean) * (x - mean);
        (a + d2, b + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    Ok(m4 / (m2 * m2) - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::build_fqam;
    use crate::rate::mixture::{FactoredInterference, Interferer};

    fn aggressors(fqam: &crate::modem::Constellation, count: usize, total_inr: f64) -> Vec<Interferer<'_>> {
        (0..count)
            .map(|j| Interferer {
                amplitude: (0..4)
                    .map(|m| Complex64::from_polar((total_inr / count as f64).sqrt(), 0.4 + 0.9 * j as f64 + 0.3 * m as f64))
                    .collect(),
                constellation: Some(fqam),
                block_tone: 0,
            })
            .collect()
    }

    #[test]
    fn gaussian_noise_is_mesokurtic() {
        let model = FactoredInterference::build(&[], &[1.0; 4], 4).unwrap();
        assert!(excess_kurtosis(&model, 0, 1_000_000, 1).unwrap().abs() < 0.05);
    }

    #[test]
    fn single_aggressor_is_leptokurtic_and_sums_are_less_so() {
        let f = build_fqam(4, 4).unwrap();
        let one = FactoredInterference::build(&aggressors(&f, 1, 100.0), &[1.0; 4], 6).unwrap();
        let six = FactoredInterference::build(&aggressors(&f, 6, 100.0), &[1.0; 4], 6).unwrap();
        let k1 = excess_kurtosis(&one, 0, 200_000, 2).unwrap();
        let k6 = excess_kurtosis(&six, 0, 200_000, 2).unwrap();
        assert!(k1 > 1.0, "{k1}");
        assert!(k6.abs() < k1.abs(), "{k6} vs {k1}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let model = FactoredInterference::build(&[], &[1.0; 2], 4).unwrap();
        assert!(excess_kurtosis(&model, 2, 100, 0).is_err());
        assert!(excess_kurtosis(&model, 0, 3, 0).is_err());
    }
}
