//! Interference-plus-noise models for a victim symbol block.
//!
//! Two equivalent representations of the same density are provided:
//!
//! * [`InterferenceMixture`] enumerates every joint aggressor symbol choice as
//!   one Gaussian component. It is the direct definition and is used as the
//!   reference.
//! * [`FactoredInterference`] exploits the fact that every aggressor symbol
//!   occupies at most one tone of the block. The likelihood is evaluated as a
//!   sum over assignments of aggressors to tones, computed with a subset
//!   convolution, which is exponentially cheaper than flat enumeration.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SimError};
use crate::modem::{Constellation, TonePoint};

/// Default number of aggressors enumerated exactly.
pub const DEFAULT_AGGRESSOR_CAP: usize = 4;

/// One interfering transmission as seen over the victim block.
///
/// `amplitude[m]` is the complex gain on victim tone `m`, normalized so that
/// the mean received power on that tone is `|amplitude[m]|^2` whatever the
/// modulation. A multi-tone constellation is therefore scaled by `sqrt(M_F)`,
/// which keeps the average power per tone equal to that of QAM.
#[derive(Debug, Clone)]
pub struct Interferer<'a> {
    pub amplitude: Vec<Complex64>,
    /// `None` means Gaussian signalling; such interferers are always folded
    /// into the noise.
    pub constellation: Option<&'a Constellation>,
    /// Position of a single-tone victim inside this aggressor's block.
    pub block_tone: usize,
}

impl<'a> Interferer<'a> {
    pub fn mean_power(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.amplitude.len() as f64
    }

    /// Per-option offsets over the victim block: `(tone, value)` or `None`
    /// when the aggressor symbol leaves the victim tone silent. One entry per
    /// aggressor constellation point.
    fn sparse_offsets(&self, victim_tones: usize) -> Result<Vec<Option<(usize, Complex64)>>> {
        let c = self
            .constellation
            .ok_or_else(|| SimError::Usage("gaussian interferer cannot be enumerated".into()))?;
        let scale = (c.m_f() as f64).sqrt();
        if c.m_f() == victim_tones {
            Ok(c.points()
                .iter()
                .map(|p| Some((p.tone, self.amplitude[p.tone] * p.value * scale)))
                .collect())
        } else if victim_tones == 1 {
            if self.block_tone >= c.m_f() {
                return Err(SimError::config(
                    "block_tone",
                    format!("tone {} outside aggressor block of {}", self.block_tone, c.m_f()),
                ));
            }
            Ok(c.points()
                .iter()
                .map(|p| (p.tone == self.block_tone).then(|| (0, self.amplitude[0] * p.value * scale)))
                .collect())
        } else {
            Err(SimError::config(
                "fqam.m_f",
                format!(
                    "aggressor block of {} tones does not align with victim block of {victim_tones} tones",
                    c.m_f()
                ),
            ))
        }
    }
}

/// Which interferers are enumerated and the Gaussian noise left over.
#[derive(Debug, Clone)]
pub struct AggressorSelection {
    pub enumerated: Vec<usize>,
    pub folded: Vec<usize>,
    /// Per-tone complex noise variance: thermal plus folded interference.
    pub noise_var: Vec<f64>,
}

/// Strongest discrete interferers (by mean power, ties by index) up to `cap`
/// are enumerated. Everything else is folded into Gaussian noise of matched
/// per-tone power.
pub fn select_aggressors(interferers: &[Interferer<'_>], noise_var: &[f64], cap: usize) -> Result<AggressorSelection> {
    let tones = noise_var.len();
    if tones == 0 {
        return Err(SimError::Usage("victim block has no tones".into()));
    }
    for (i, it) in interferers.iter().enumerate() {
        if it.amplitude.len() != tones {
            return Err(SimError::Usage(format!(
                "interferer {i} has {} tone gains, victim block has {tones}",
                it.amplitude.len()
            )));
        }
    }
    let mut order: Vec<usize> = (0..interferers.len()).collect();
    order.sort_by(|&a, &b| {
        interferers[b]
            .mean_power()
            .total_cmp(&interferers[a].mean_power())
            .then(a.cmp(&b))
    });
    let mut enumerated = Vec::new();
    let mut folded = Vec::new();
    for i in order {
        if interferers[i].constellation.is_some() && enumerated.len() < cap {
            enumerated.push(i);
        } else {
            folded.push(i);
        }
    }
    let mut nv = noise_var.to_vec();
    for &i in &folded {
        for (m, v) in nv.iter_mut().enumerate() {
            *v += interferers[i].amplitude[m].norm_sqr();
        }
    }
    if nv.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(SimError::Usage("noise variance must be positive and finite".into()));
    }
    Ok(AggressorSelection { enumerated, folded, noise_var: nv })
}

/// Density of the interference-plus-noise vector over a victim block.
pub trait InterferenceModel {
    fn tones(&self) -> usize;

    fn noise_var(&self) -> &[f64];

    /// Draw one interference-plus-noise vector into `out`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]);

    /// `out[h]` receives `p(y | x = hyps[h])` times a positive factor common
    /// to all hypotheses. `hyps` are received (channel-scaled) points.
    fn likelihoods(&self, y: &[Complex64], hyps: &[TonePoint], out: &mut [f64]);
}

fn add_noise<R: Rng + ?Sized>(rng: &mut R, noise_var: &[f64], out: &mut [Complex64]) {
    for (o, &v) in out.iter_mut().zip(noise_var) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *o += Complex64::new(re, im) * (v / 2.0).sqrt();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub probability: f64,
    pub offset: Vec<Complex64>,
}

/// Flat Gaussian mixture: one component per joint aggressor symbol choice.
#[derive(Debug, Clone)]
pub struct InterferenceMixture {
    pub components: Vec<MixtureComponent>,
    pub noise_var: Vec<f64>,
    cumulative: Vec<f64>,
}

impl InterferenceMixture {
    /// Enumerate all joint symbol choices of the selected aggressors.
    pub fn build(interferers: &[Interferer<'_>], noise_var: &[f64], cap: usize) -> Result<Self> {
        let sel = select_aggressors(interferers, noise_var, cap)?;
        let tones = noise_var.len();
        let mut components = vec![MixtureComponent {
            probability: 1.0,
            offset: vec![Complex64::new(0.0, 0.0); tones],
        }];
        for &i in &sel.enumerated {
            let opts = interferers[i].sparse_offsets(tones)?;
            let p = 1.0 / opts.len() as f64;
            let mut next = Vec::with_capacity(components.len() * opts.len());
            for c in &components {
                for o in &opts {
                    let mut offset = c.offset.clone();
                    if let Some((m, v)) = o {
                        offset[*m] += v;
                    }
                    next.push(MixtureComponent { probability: c.probability * p, offset });
                }
            }
            components = next;
        }
        Ok(Self::from_components(components, sel.noise_var))
    }

    pub fn from_components(components: Vec<MixtureComponent>, noise_var: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = components
            .iter()
            .map(|c| {
                acc += c.probability;
                acc
            })
            .collect();
        Self { components, noise_var, cumulative }
    }

    pub fn total_probability(&self) -> f64 {
        self.components.iter().map(|c| c.probability).sum()
    }
}

impl InterferenceModel for InterferenceMixture {
    fn tones(&self) -> usize {
        self.noise_var.len()
    }

    fn noise_var(&self) -> &[f64] {
        &self.noise_var
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        let u: f64 = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.components.len() - 1);
        out.copy_from_slice(&self.components[idx].offset);
        add_noise(rng, &self.noise_var, out);
    }

    fn likelihoods(&self, y: &[Complex64], hyps: &[TonePoint], out: &mut [f64]) {
        let mut logs = Vec::with_capacity(hyps.len() * self.components.len());
        for h in hyps {
            for c in &self.components {
                let mut e = 0.0;
                for m in 0..y.len() {
                    let x = if m == h.tone { h.value } else { Complex64::new(0.0, 0.0) };
                    e += (y[m] - x - c.offset[m]).norm_sqr() / self.noise_var[m];
                }
                logs.push(c.probability.ln() - e);
            }
        }
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (h, o) in out.iter_mut().enumerate() {
            let row = &logs[h * self.components.len()..(h + 1) * self.components.len()];
            *o = row.iter().map(|l| (l - max).exp()).sum();
        }
    }
}

/// One enumerated aggressor as a distribution over sparse offsets.
#[derive(Debug, Clone)]
struct SparseSource {
    /// Probability of leaving the whole block silent.
    p_null: f64,
    /// Per tone: `(probability, offset)` of options landing on that tone.
    per_tone: Vec<Vec<(f64, Complex64)>>,
    /// For sampling: cumulative probability and option.
    cumulative: Vec<(f64, Option<(usize, Complex64)>)>,
}

impl SparseSource {
    fn new(opts: Vec<Option<(usize, Complex64)>>, tones: usize) -> Self {
        let p = 1.0 / opts.len() as f64;
        let mut p_null = 0.0;
        let mut per_tone: Vec<Vec<(f64, Complex64)>> = vec![Vec::new(); tones];
        for o in &opts {
            match o {
                None => p_null += p,
                Some((m, v)) => {
                    // merge identical offsets
                    if let Some(e) = per_tone[*m].iter_mut().find(|e| e.1 == *v) {
                        e.0 += p;
                    } else {
                        per_tone[*m].push((p, *v));
                    }
                }
            }
        }
        let mut acc = 0.0;
        let cumulative = opts
            .into_iter()
            .map(|o| {
                acc += p;
                (acc, o)
            })
            .collect();
        Self { p_null, per_tone, cumulative }
    }
}

/// Terms below `exp(-60)` are dropped. The transmitted hypothesis keeps a
/// term of order `exp(-|noise|^2 / var)`, so the omission is far below the
/// Monte Carlo error.
const NEGLIGIBLE_EXPONENT: f64 = 60.0;

/// Joint choice of a subset of sources all landing on one tone.
#[derive(Debug, Clone, Copy)]
struct ToneCombo {
    mask: usize,
    probability: f64,
    offset: Complex64,
}

/// Subset convolution `out[mask] = sum_{s subset of mask} a[mask ^ s] * b[s]`.
fn subset_convolve(a: &[f64], b: &[f64], out: &mut [f64]) {
    for mask in 0..out.len() {
        let mut acc = a[mask] * b[0];
        let mut s = mask;
        while s > 0 {
            acc += a[mask ^ s] * b[s];
            s = (s - 1) & mask;
        }
        out[mask] = acc;
    }
}

/// Exact mixture density evaluated through per-tone subset sums.
///
/// For residual `r` on tone `m`, `F_m(S)` sums `prob * exp(-|r - offset|^2 / var)`
/// over joint choices in which exactly the sources in `S` land on `m`. The
/// block likelihood is the subset convolution of the per-tone factors with
/// the probability that the remaining sources stay silent. Every term is at
/// most one, and the transmitted hypothesis always keeps a term of order
/// `exp(-|noise|^2 / var)`, so the linear domain is safe.
#[derive(Debug, Clone)]
pub struct FactoredInterference {
    sources: Vec<SparseSource>,
    noise_var: Vec<f64>,
    /// `null_weight[mask]`: probability that every source in `mask` is silent.
    null_weight: Vec<f64>,
    combos: Vec<Vec<ToneCombo>>,
}

impl FactoredInterference {
    pub fn build(interferers: &[Interferer<'_>], noise_var: &[f64], cap: usize) -> Result<Self> {
        let sel = select_aggressors(interferers, noise_var, cap)?;
        let tones = noise_var.len();
        let sources = sel
            .enumerated
            .iter()
            .map(|&i| Ok(SparseSource::new(interferers[i].sparse_offsets(tones)?, tones)))
            .collect::<Result<Vec<_>>>()?;
        let k = sources.len();
        let null_weight = (0..1usize << k)
            .map(|mask| (0..k).filter(|j| mask >> j & 1 == 1).map(|j| sources[j].p_null).product())
            .collect();
        let combos = (0..tones)
            .map(|m| {
                let mut list = vec![ToneCombo { mask: 0, probability: 1.0, offset: Complex64::new(0.0, 0.0) }];
                for (j, s) in sources.iter().enumerate() {
                    let mut next = list.clone();
                    for c in &list {
                        for &(p, v) in &s.per_tone[m] {
                            next.push(ToneCombo {
                                mask: c.mask | 1 << j,
                                probability: c.probability * p,
                                offset: c.offset + v,
                            });
                        }
                    }
                    list = next;
                }
                list
            })
            .collect();
        Ok(Self { sources, noise_var: sel.noise_var, null_weight, combos })
    }

    pub fn enumerated(&self) -> usize {
        self.sources.len()
    }

    fn tone_factors(&self, m: usize, r: Complex64, out: &mut [f64]) {
        out.fill(0.0);
        let inv_var = 1.0 / self.noise_var[m];
        for c in &self.combos[m] {
            let e = (r - c.offset).norm_sqr() * inv_var;
            if e < NEGLIGIBLE_EXPONENT {
                out[c.mask] += c.probability * (-e).exp();
            }
        }
    }
}

impl InterferenceModel for FactoredInterference {
    fn tones(&self) -> usize {
        self.noise_var.len()
    }

    fn noise_var(&self) -> &[f64] {
        &self.noise_var
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for s in &self.sources {
            let u: f64 = rng.gen::<f64>() * s.cumulative.last().map(|c| c.0).unwrap_or(1.0);
            let idx = s.cumulative.partition_point(|c| c.0 <= u).min(s.cumulative.len() - 1);
            if let Some((m, v)) = s.cumulative[idx].1 {
                out[m] += v;
            }
        }
        add_noise(rng, &self.noise_var, out);
    }

    fn likelihoods(&self, y: &[Complex64], hyps: &[TonePoint], out: &mut [f64]) {
        let tones = self.tones();
        let n = self.null_weight.len();
        let full = n - 1;

        let mut background = vec![0.0; tones * n];
        for m in 0..tones {
            self.tone_factors(m, y[m], &mut background[m * n..(m + 1) * n]);
        }

        // Convolution of the silent sources with every tone except `t`.
        let mut excluding = vec![0.0; tones * n];
        let mut acc = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        for t in 0..tones {
            if !hyps.iter().any(|h| h.tone == t) {
                continue;
            }
            acc.copy_from_slice(&self.null_weight);
            for m in (0..tones).filter(|&m| m != t) {
                subset_convolve(&acc, &background[m * n..(m + 1) * n], &mut tmp);
                std::mem::swap(&mut acc, &mut tmp);
            }
            excluding[t * n..(t + 1) * n].copy_from_slice(&acc);
        }

        let mut own = vec![0.0; n];
        for (h, p) in hyps.iter().enumerate() {
            self.tone_factors(p.tone, y[p.tone] - p.value, &mut own);
            let rest = &excluding[p.tone * n..(p.tone + 1) * n];
            let mut s = full;
            let mut total = rest[full] * own[0];
            while s > 0 {
                total += rest[full ^ s] * own[s];
                s = (s - 1) & full;
            }
            out[h] = total;
        }
    }
}
