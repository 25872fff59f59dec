//! One Monte Carlo drop: placement, links, scheduling and per-user rates.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{Mode, QamInterference, Scenario, SimConfig};
use crate::channel::{db_to_linear, dbm_to_watts, draw_link, linear_to_db, noise_power, LinkKey, LinkRealization};
use crate::error::{Result, SimError};
use crate::geometry::{
    build_lattice, drop_users, first_tier_interferers, form_beams, AntennaPattern, SitePlan, UeKind, UePlacement,
};
use crate::modem::{build_fqam, build_qam, Constellation, Modulation, TonePoint};
use crate::rate::{estimate_mi, user_rate, FactoredInterference, Interferer};
use crate::rng::{derive_seed, substream, Stream};
use crate::scheduler::{
    centralized_space_assign, classify_users, frequency_partition, BeamTable, Subband, Thresholds,
};

/// One row of the per-user output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserRecord {
    pub drop: u64,
    pub cell: usize,
    pub ue: usize,
    pub kind: UeKind,
    pub modulation: Modulation,
    pub sinr_db: f64,
    pub mi_bits: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub index: u64,
    pub users: Vec<UserRecord>,
    /// Transmitters (beams or cell subbands) using FQAM in this drop.
    pub fqam_transmitters: usize,
}

/// Everything that stays fixed across drops.
#[derive(Debug, Clone)]
pub struct DropContext {
    pub config: SimConfig,
    pub plan: SitePlan,
    pub first_tier: Vec<Vec<usize>>,
    pub fqam: Constellation,
    pub qam: Constellation,
}

impl DropContext {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let plan = build_lattice(config.n_cells, config.isd)?;
        let first_tier = (0..plan.n_cells()).map(|c| first_tier_interferers(&plan, c)).collect();
        let fqam = build_fqam(config.fqam.m_f, config.fqam.m_q)?;
        let qam = build_qam(config.qam.m_q)?;
        Ok(Self { config, plan, first_tier, fqam, qam })
    }

    pub fn drop_seed(&self, index: u64) -> u64 {
        derive_seed(self.config.mc.seed, Stream::Drop, &[index])
    }

    /// Run drop `index` under `mode`. Both modes see identical placements and
    /// channels for the same index.
    pub fn run(&self, index: u64, mode: Mode) -> Result<DropResult> {
        let r = match self.config.scenario {
            Scenario::Space => self.run_space(index, mode),
            Scenario::Frequency => self.run_frequency(index, mode),
        };
        r.map_err(|e| SimError::Drop { index, source: Box::new(e) })
    }

    fn tones(&self) -> usize {
        self.config.fqam.m_f
    }

    fn run_space(&self, index: u64, mode: Mode) -> Result<DropResult> {
        let cfg = &self.config;
        let seed = self.drop_seed(index);
        let ues = drop_users(&self.plan, cfg.users_per_cell, seed)?;
        let pattern = AntennaPattern::from_beamwidth(cfg.beam_phi_3db, cfg.omni_gain_db)?;
        let beams = form_beams(&self.plan, &ues, pattern);
        let beam_power = dbm_to_watts(cfg.bs_power_dbm) / cfg.users_per_cell as f64;
        let noise = noise_power(cfg.noise_temperature, cfg.ue_bandwidth);
        let upc = cfg.users_per_cell;

        let victims: Vec<Victim> = ues
            .iter()
            .map(|ue| {
                let d = self.plan.bs_positions[ue.cell].distance(&ue.position);
                let serving = draw_link(
                    &cfg.channel,
                    LinkKey { site: ue.cell, tx: ue.ue_id, rx: ue.ue_id },
                    d,
                    beams[ue.ue_id].gain_towards(&self.plan, &ue.position),
                    self.tones(),
                    seed,
                );
                let mut links = Vec::new();
                for &c in &self.first_tier[ue.cell] {
                    let dist = self.plan.bs_positions[c].distance(&ue.position);
                    for b in c * upc..(c + 1) * upc {
                        let l = draw_link(
                            &cfg.channel,
                            LinkKey { site: c, tx: b, rx: ue.ue_id },
                            dist,
                            beams[b].gain_towards(&self.plan, &ue.position),
                            self.tones(),
                            seed,
                        );
                        links.push((b, l));
                    }
                }
                Victim::new(ue, &serving, beam_power, &links, beam_power, noise, cfg.ue_bandwidth, 1, cfg.aggressor_window_db)
            })
            .collect();

        let mut eval = Evaluator::new(self, seed, &victims);
        let assignment = match mode {
            Mode::AllQam => vec![Modulation::Qam; victims.len()],
            Mode::Hybrid => {
                let table = BeamTable {
                    sinr_db: victims.iter().map(|v| v.sinr_db).collect(),
                    aggressors: victims.iter().map(|v| v.aggressor_ids()).collect(),
                    profiles: ues.iter().map(|u| cfg.service.profile(u.kind == UeKind::CellEdge)).collect(),
                };
                let th: Thresholds = cfg.thresholds.into();
                let mut oracle = |a: &[Modulation]| -> Result<Vec<f64>> {
                    (0..a.len()).map(|v| eval.user(v, a[v], |tx| a[tx] == Modulation::Fqam).map(|r| r.1)).collect()
                };
                centralized_space_assign(&table, &th, &mut oracle)?.modulation
            }
        };
        let mut users = Vec::with_capacity(ues.len());
        for (v, ue) in ues.iter().enumerate() {
            let (mi, rate) = eval.user(v, assignment[v], |tx| assignment[tx] == Modulation::Fqam)?;
            users.push(record(index, ue, assignment[v], victims[v].sinr_db, mi, rate));
        }
        let fqam_transmitters = assignment.iter().filter(|m| **m == Modulation::Fqam).count();
        Ok(DropResult { index, users, fqam_transmitters })
    }

    fn run_frequency(&self, index: u64, mode: Mode) -> Result<DropResult> {
        let cfg = &self.config;
        let seed = self.drop_seed(index);
        let ues = drop_users(&self.plan, cfg.users_per_cell, seed)?;
        let pattern = AntennaPattern::from_beamwidth(TAU, cfg.omni_gain_db)?;
        let gain = match pattern {
            AntennaPattern::Omni { gain_db } => gain_db,
            AntennaPattern::Directional(_) => unreachable!(),
        };
        let p_tx = dbm_to_watts(cfg.bs_power_dbm);
        let link = |site: usize, ue: &UePlacement| {
            let d = self.plan.bs_positions[site].distance(&ue.position);
            draw_link(&cfg.channel, LinkKey { site, tx: site, rx: ue.ue_id }, d, gain, self.tones(), seed)
        };
        let serving: Vec<LinkRealization> = ues.iter().map(|ue| link(ue.cell, ue)).collect();
        let interf: Vec<Vec<(usize, LinkRealization)>> =
            ues.iter().map(|ue| self.first_tier[ue.cell].iter().map(|&c| (c, link(c, ue))).collect()).collect();

        // wideband SINR with every neighbour transmitting over the whole band
        let n_sys = noise_power(cfg.noise_temperature, cfg.system_bandwidth);
        let wide_sinr: Vec<f64> = (0..ues.len())
            .map(|u| {
                let i: f64 = interf[u].iter().map(|(_, l)| l.mean_power_gain() * p_tx).sum();
                linear_to_db(serving[u].mean_power_gain() * p_tx / (i + n_sys))
            })
            .collect();
        let classes = classify_users(&wide_sinr, cfg.thresholds.gamma_th_db);
        let user_cells: Vec<usize> = ues.iter().map(|u| u.cell).collect();
        let mut fplan = frequency_partition(&self.plan, &user_cells, &classes, cfg.rho)?;
        if mode == Mode::AllQam {
            fplan = fplan.all_qam();
        }

        let n_cells = self.plan.n_cells();
        let mut load = HashMap::new();
        for (u, ue) in ues.iter().enumerate() {
            *load.entry((ue.cell, fplan.user_subband[u])).or_insert(0usize) += 1;
        }
        let victims: Vec<Victim> = ues
            .iter()
            .enumerate()
            .map(|(u, ue)| {
                let band = fplan.user_subband[u];
                let f = fplan.subband_fraction(band);
                let links: Vec<(usize, LinkRealization)> =
                    interf[u].iter().filter(|(c, _)| load.contains_key(&(*c, band))).cloned().collect();
                Victim::new(
                    ue,
                    &serving[u],
                    p_tx * f,
                    &links,
                    p_tx * f,
                    noise_power(cfg.noise_temperature, cfg.system_bandwidth * f),
                    cfg.system_bandwidth * f,
                    load[&(ue.cell, band)],
                    cfg.aggressor_window_db,
                )
            })
            .collect();

        let mut eval = Evaluator::new(self, seed, &victims);
        let mut users = Vec::with_capacity(ues.len());
        for (u, ue) in ues.iter().enumerate() {
            let band = fplan.user_subband[u];
            let own = fplan.modulation(ue.cell, band);
            let (mi, rate) = eval.user(u, own, |c| fplan.modulation(c, band) == Modulation::Fqam)?;
            users.push(record(index, ue, own, victims[u].sinr_db, mi, rate));
        }
        let fqam_transmitters = (0..n_cells)
            .filter(|&c| fplan.reserved_modulation[c] == Modulation::Fqam && load.contains_key(&(c, Subband::Reserved)))
            .count();
        Ok(DropResult { index, users, fqam_transmitters })
    }
}

fn record(drop: u64, ue: &UePlacement, modulation: Modulation, sinr_db: f64, mi_bits: f64, rate_bps: f64) -> UserRecord {
    UserRecord { drop, cell: ue.cell, ue: ue.ue_id, kind: ue.kind, modulation, sinr_db, mi_bits, rate_bps }
}

/// A receiver's view of its links, normalized to unit noise per tone.
#[derive(Debug, Clone)]
struct Victim {
    ue: usize,
    serving: Vec<Complex64>,
    /// `(transmitter id, per-tone amplitude, is aggressor)`.
    interferers: Vec<(usize, Vec<Complex64>, bool)>,
    sinr_db: f64,
    bandwidth: f64,
    /// Users time-sharing the same transmitter resource.
    share: usize,
}

impl Victim {
    #[allow(clippy::too_many_arguments)]
    fn new(
        ue: &UePlacement,
        serving: &LinkRealization,
        serving_power: f64,
        links: &[(usize, LinkRealization)],
        interferer_power: f64,
        noise_w: f64,
        bandwidth: f64,
        share: usize,
        window_db: f64,
    ) -> Self {
        let tones = serving.fading.len();
        let amp = |l: &LinkRealization, p: f64| -> Vec<Complex64> {
            (0..tones).map(|m| l.amplitude(m) * (p / noise_w).sqrt()).collect()
        };
        let powers: Vec<f64> = links.iter().map(|(_, l)| l.mean_power_gain() * interferer_power / noise_w).collect();
        let strongest = powers.iter().copied().fold(0.0, f64::max);
        let floor = (strongest / db_to_linear(window_db)).max(1.0);
        let signal = serving.mean_power_gain() * serving_power / noise_w;
        let sinr = signal / (powers.iter().sum::<f64>() + 1.0);
        Victim {
            ue: ue.ue_id,
            serving: amp(serving, serving_power),
            interferers: links.iter().zip(&powers).map(|((id, l), &p)| (*id, amp(l, interferer_power), p >= floor)).collect(),
            sinr_db: linear_to_db(sinr),
            bandwidth,
            share,
        }
    }

    fn aggressor_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.interferers.iter().filter(|i| i.2).map(|i| i.0).collect();
        ids.sort_unstable();
        ids
    }
}

/// Per-user MI and rate, memoized on the inputs that can change between
/// scheduler candidates: own modulation and which aggressors use FQAM.
struct Evaluator<'a> {
    ctx: &'a DropContext,
    seed: u64,
    victims: &'a [Victim],
    cache: HashMap<(usize, Modulation, u64), (f64, f64)>,
}

impl<'a> Evaluator<'a> {
    fn new(ctx: &'a DropContext, seed: u64, victims: &'a [Victim]) -> Self {
        Self { ctx, seed, victims, cache: HashMap::new() }
    }

    fn user(&mut self, v: usize, own: Modulation, is_fqam: impl Fn(usize) -> bool) -> Result<(f64, f64)> {
        let victim = &self.victims[v];
        let mut mask = 0u64;
        for (i, it) in victim.interferers.iter().enumerate() {
            if it.2 && is_fqam(it.0) {
                mask |= 1 << i;
            }
        }
        if let Some(r) = self.cache.get(&(v, own, mask)) {
            return Ok(*r);
        }
        let r = self.compute(victim, own, mask)?;
        self.cache.insert((v, own, mask), r);
        Ok(r)
    }

    fn compute(&self, victim: &Victim, own: Modulation, fqam_mask: u64) -> Result<(f64, f64)> {
        let cfg = &self.ctx.config;
        let tones = victim.serving.len();
        let n = cfg.mc.mi_samples;
        let discrete_qam = cfg.qam_interference == QamInterference::Discrete && own == Modulation::Qam;
        let constellation_of = |i: usize| -> Option<&Constellation> {
            let (_, _, aggressor) = victim.interferers[i];
            if !aggressor {
                None
            } else if fqam_mask >> i & 1 == 1 {
                Some(&self.ctx.fqam)
            } else if discrete_qam {
                Some(&self.ctx.qam)
            } else {
                None
            }
        };
        let mi = match own {
            Modulation::Fqam => {
                let its: Vec<Interferer> = (0..victim.interferers.len())
                    .map(|i| Interferer {
                        amplitude: victim.interferers[i].1.clone(),
                        constellation: constellation_of(i),
                        block_tone: 0,
                    })
                    .collect();
                let model = FactoredInterference::build(&its, &vec![1.0; tones], cfg.aggressor_cap)?;
                let scale = (self.ctx.fqam.m_f() as f64).sqrt();
                let points: Vec<TonePoint> = self
                    .ctx
                    .fqam
                    .points()
                    .iter()
                    .map(|p| TonePoint { tone: p.tone, value: p.value * scale * victim.serving[p.tone] })
                    .collect();
                let mut rng = substream(self.seed, Stream::MutualInformation, &[victim.ue as u64, 0]);
                estimate_mi(&points, &model, n, &mut rng)?.bits
            }
            Modulation::Qam => {
                // a single-tone symbol on each tone of the block
                let mut weighted = 0.0;
                for p in 0..tones {
                    let n_p = n / tones + usize::from(p < n % tones);
                    if n_p == 0 {
                        continue;
                    }
                    let its: Vec<Interferer> = (0..victim.interferers.len())
                        .map(|i| Interferer {
                            amplitude: vec![victim.interferers[i].1[p]],
                            constellation: constellation_of(i),
                            block_tone: p,
                        })
                        .collect();
                    let model = FactoredInterference::build(&its, &[1.0], cfg.aggressor_cap)?;
                    let points: Vec<TonePoint> = self
                        .ctx
                        .qam
                        .points()
                        .iter()
                        .map(|q| TonePoint { tone: 0, value: q.value * victim.serving[p] })
                        .collect();
                    let mut rng = substream(self.seed, Stream::MutualInformation, &[victim.ue as u64, 1 + p as u64]);
                    weighted += estimate_mi(&points, &model, n_p, &mut rng)?.bits * n_p as f64;
                }
                weighted / n as f64
            }
        };
        let m_f = if own == Modulation::Fqam { self.ctx.fqam.m_f() } else { 1 };
        Ok((mi, user_rate(mi, victim.bandwidth, m_f) / victim.share as f64))
    }
}
