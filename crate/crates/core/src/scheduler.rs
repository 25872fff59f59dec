//! QAM/FQAM resource partitioning.
//!
//! Space mode decides a modulation per beam with a central greedy search
//! over "flip groups" (all aggressors of one victim beam switch together).
//! Frequency mode splits the band into a reserved subband, where cells that
//! interfere with a low-SINR user transmit FQAM, and a regular QAM subband.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::{first_tier_interferers, SitePlan};
use crate::modem::Modulation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// SINR threshold, dB.
    pub gamma_th_db: f64,
    /// Aggressor-count threshold.
    pub n_th: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceProfile {
    /// Local service priority level; higher is more critical.
    pub lspl: u32,
    /// Largest tolerable relative rate loss, in [0, 1].
    pub rm: f64,
}

impl Default for ServiceProfile {
    fn default() -> Self {
        Self { lspl: 0, rm: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserClasses {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
}

/// Users strictly below the threshold are low-SINR.
pub fn classify_users(sinrs_db: &[f64], gamma_th_db: f64) -> UserClasses {
    let mut out = UserClasses::default();
    for (i, &s) in sinrs_db.iter().enumerate() {
        if s < gamma_th_db {
            out.low.push(i);
        } else {
            out.high.push(i);
        }
    }
    out
}

/// QAM-to-FQAM switching rule: `gamma < gamma_th` and `n < n_th`.
pub fn switch_eligible(gamma_db: f64, n_aggressors: usize, th: &Thresholds) -> bool {
    gamma_db < th.gamma_th_db && n_aggressors < th.n_th
}

/// Evaluates per-beam rates for a candidate assignment.
pub trait RateOracle {
    fn beam_rates(&mut self, assignment: &[Modulation]) -> Result<Vec<f64>>;
}

impl<F> RateOracle for F
where
    F: FnMut(&[Modulation]) -> Result<Vec<f64>>,
{
    fn beam_rates(&mut self, assignment: &[Modulation]) -> Result<Vec<f64>> {
        self(assignment)
    }
}

/// Everything the central scheduler knows about the beams.
#[derive(Debug, Clone)]
pub struct BeamTable {
    pub sinr_db: Vec<f64>,
    /// `aggressors[v]`: beams interfering significantly with victim `v`.
    pub aggressors: Vec<Vec<usize>>,
    pub profiles: Vec<ServiceProfile>,
}

impl BeamTable {
    pub fn len(&self) -> usize {
        self.sinr_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sinr_db.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.len();
        if self.aggressors.len() != n || self.profiles.len() != n {
            return Err(SimError::Usage("beam table columns differ in length".into()));
        }
        for (v, a) in self.aggressors.iter().enumerate() {
            if let Some(&b) = a.iter().find(|&&b| b >= n || b == v) {
                return Err(SimError::Usage(format!("beam {v} lists invalid aggressor {b}")));
            }
        }
        for (b, p) in self.profiles.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.rm) {
                return Err(SimError::config(format!("profiles[{b}].rm"), "rate margin must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Victims allowed to request a switch, ascending.
    pub fn eligible_victims(&self, th: &Thresholds) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| !self.aggressors[v].is_empty() && switch_eligible(self.sinr_db[v], self.aggressors[v].len(), th))
            .collect()
    }

    /// A FQAM beam is justified when its loss against the all-QAM baseline
    /// stays within its rate margin, or when some eligible victim it
    /// interferes with has a higher service priority.
    pub fn flip_justified(&self, beam: usize, eligible: &[usize], baseline: f64, rate: f64) -> bool {
        let loss = if baseline > 0.0 { (baseline - rate) / baseline } else { 0.0 };
        if loss <= self.profiles[beam].rm {
            return true;
        }
        eligible
            .iter()
            .any(|&v| self.aggressors[v].contains(&beam) && self.profiles[v].lspl > self.profiles[beam].lspl)
    }

    /// Post-hoc check of an assignment against its rates and the baseline.
    pub fn is_feasible(&self, th: &Thresholds, assignment: &[Modulation], baseline: &[f64], rates: &[f64]) -> bool {
        let eligible = self.eligible_victims(th);
        assignment.iter().enumerate().all(|(b, m)| {
            *m == Modulation::Qam
                || (eligible.iter().any(|&v| self.aggressors[v].contains(&b))
                    && self.flip_justified(b, &eligible, baseline[b], rates[b]))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceAssignment {
    pub modulation: Vec<Modulation>,
    pub rates: Vec<f64>,
    pub baseline_rates: Vec<f64>,
    /// Victims whose flip groups were accepted, in acceptance order.
    pub accepted_victims: Vec<usize>,
}

impl SpaceAssignment {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn fqam_beams(&self) -> Vec<usize> {
        (0..self.modulation.len()).filter(|&b| self.modulation[b] == Modulation::Fqam).collect()
    }
}

fn call_oracle<O: RateOracle + ?Sized>(oracle: &mut O, a: &[Modulation], beam: usize) -> Result<Vec<f64>> {
    let rates = oracle
        .beam_rates(a)
        .map_err(|e| SimError::Oracle { beam, source: Box::new(e) })?;
    if rates.len() != a.len() {
        return Err(SimError::Oracle {
            beam,
            source: Box::new(SimError::Usage(format!("oracle returned {} rates for {} beams", rates.len(), a.len()))),
        });
    }
    Ok(rates)
}

/// Central greedy hill climb. Starting from all-QAM, each round evaluates
/// flipping the aggressors of every eligible victim and accepts the feasible
/// group with the largest sum-rate gain (ties to the lowest victim id).
/// Stops when no group improves the sum rate.
pub fn centralized_space_assign<O: RateOracle + ?Sized>(table: &BeamTable, th: &Thresholds, oracle: &mut O) -> Result<SpaceAssignment> {
    table.check()?;
    let n = table.len();
    let mut current = vec![Modulation::Qam; n];
    let baseline = call_oracle(oracle, &current, 0)?;
    let mut rates = baseline.clone();
    let eligible = table.eligible_victims(th);
    let mut accepted = Vec::new();

    loop {
        let current_sum: f64 = rates.iter().sum();
        let mut best: Option<(f64, usize, Vec<Modulation>, Vec<f64>)> = None;
        for &v in &eligible {
            let group: Vec<usize> = table.aggressors[v]
                .iter()
                .copied()
                .filter(|&b| current[b] == Modulation::Qam)
                .collect();
            if group.is_empty() {
                continue;
            }
            let mut cand = current.clone();
            for &b in &group {
                cand[b] = Modulation::Fqam;
            }
            let cand_rates = call_oracle(oracle, &cand, v)?;
            let feasible = (0..n)
                .filter(|&b| cand[b] == Modulation::Fqam)
                .all(|b| table.flip_justified(b, &eligible, baseline[b], cand_rates[b]));
            if !feasible {
                continue;
            }
            let gain = cand_rates.iter().sum::<f64>() - current_sum;
            if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.0) {
                best = Some((gain, v, cand, cand_rates));
            }
        }
        match best {
            Some((_, v, cand, cand_rates)) => {
                current = cand;
                rates = cand_rates;
                accepted.push(v);
            }
            None => break,
        }
    }
    Ok(SpaceAssignment { modulation: current, rates, baseline_rates: baseline, accepted_victims: accepted })
}

/// Largest beam count accepted by the exhaustive optimizer.
pub const BRUTE_FORCE_MAX_BEAMS: usize = 16;

/// Exhaustive optimum over every assignment in which FQAM beams are
/// aggressors of eligible victims and satisfy the same rate-margin and
/// priority rule as the greedy search.
pub fn brute_force_space_assign<O: RateOracle + ?Sized>(table: &BeamTable, th: &Thresholds, oracle: &mut O) -> Result<SpaceAssignment> {
    table.check()?;
    let n = table.len();
    if n > BRUTE_FORCE_MAX_BEAMS {
        return Err(SimError::Usage(format!(
            "exhaustive search supports at most {BRUTE_FORCE_MAX_BEAMS} beams, got {n}"
        )));
    }
    let eligible = table.eligible_victims(th);
    let mut candidates: Vec<usize> = eligible.iter().flat_map(|&v| table.aggressors[v].iter().copied()).collect();
    candidates.sort_unstable();
    candidates.dedup();

    let all_qam = vec![Modulation::Qam; n];
    let baseline = call_oracle(oracle, &all_qam, 0)?;
    let mut best = (baseline.iter().sum::<f64>(), all_qam, baseline.clone());
    for mask in 1u32..(1u32 << candidates.len()) {
        let mut a = vec![Modulation::Qam; n];
        for (i, &b) in candidates.iter().enumerate() {
            if mask >> i & 1 == 1 {
                a[b] = Modulation::Fqam;
            }
        }
        let beam = candidates[mask.trailing_zeros() as usize];
        let rates = call_oracle(oracle, &a, beam)?;
        let feasible = (0..n)
            .filter(|&b| a[b] == Modulation::Fqam)
            .all(|b| table.flip_justified(b, &eligible, baseline[b], rates[b]));
        let sum: f64 = rates.iter().sum();
        if feasible && sum > best.0 {
            best = (sum, a, rates);
        }
    }
    Ok(SpaceAssignment { modulation: best.1, rates: best.2, baseline_rates: baseline, accepted_victims: Vec::new() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subband {
    Reserved,
    Regular,
}

impl std::fmt::Display for Subband {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subband::Reserved => f.write_str("reserved"),
            Subband::Regular => f.write_str("regular"),
        }
    }
}

/// Frequency-domain partition of the system band.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPlan {
    /// Fraction of the band reserved for low-SINR users.
    pub reserved_fraction: f64,
    /// Per cell, the modulation transmitted on the reserved subband. The
    /// regular subband always carries QAM.
    pub reserved_modulation: Vec<Modulation>,
    /// Per user.
    pub user_subband: Vec<Subband>,
    /// Cells hosting at least one low-SINR user.
    pub victim_cells: Vec<usize>,
}

impl FrequencyPlan {
    pub fn modulation(&self, cell: usize, band: Subband) -> Modulation {
        match band {
            Subband::Reserved => self.reserved_modulation[cell],
            Subband::Regular => Modulation::Qam,
        }
    }

    /// Same split and placement with QAM on both subbands.
    pub fn all_qam(&self) -> Self {
        Self {
            reserved_modulation: vec![Modulation::Qam; self.reserved_modulation.len()],
            ..self.clone()
        }
    }

    pub fn subband_fraction(&self, band: Subband) -> f64 {
        match band {
            Subband::Reserved => self.reserved_fraction,
            Subband::Regular => 1.0 - self.reserved_fraction,
        }
    }
}

/// Low-SINR users go to the reserved subband, everyone else to the regular
/// one. Every first-tier interferer of a cell hosting a low-SINR user
/// transmits FQAM on the reserved subband.
pub fn frequency_partition(plan: &SitePlan, user_cells: &[usize], classes: &UserClasses, rho: f64) -> Result<FrequencyPlan> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(SimError::config("rho", format!("reserved fraction must lie in (0, 1), got {rho}")));
    }
    let n_users = user_cells.len();
    if let Some(&u) = classes.low.iter().chain(&classes.high).find(|&&u| u >= n_users) {
        return Err(SimError::Usage(format!("user {u} has no cell")));
    }
    if let Some(&c) = user_cells.iter().find(|&&c| c >= plan.n_cells()) {
        return Err(SimError::Usage(format!("cell {c} not in site plan")));
    }
    let mut user_subband = vec![Subband::Regular; n_users];
    let mut victim_cells = Vec::new();
    for &u in &classes.low {
        user_subband[u] = Subband::Reserved;
        victim_cells.push(user_cells[u]);
    }
    victim_cells.sort_unstable();
    victim_cells.dedup();
    let mut reserved_modulation = vec![Modulation::Qam; plan.n_cells()];
    for &v in &victim_cells {
        for a in first_tier_interferers(plan, v) {
            reserved_modulation[a] = Modulation::Fqam;
        }
    }
    Ok(FrequencyPlan { reserved_fraction: rho, reserved_modulation, user_subband, victim_cells })
}
