//! Site layout, user drops, beams and the directional antenna pattern.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::rng::{substream, Stream};

/// Random users are kept at least this far from their BS.
pub const MIN_UE_DISTANCE_M: f64 = 35.0;

const LATTICE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from `self` towards `other`, radians in (-pi, pi].
    pub fn bearing_to(&self, other: &Point2) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SitePlan {
    pub isd: f64,
    pub bs_positions: Vec<Point2>,
}

impl SitePlan {
    pub fn n_cells(&self) -> usize {
        self.bs_positions.len()
    }

    /// Index of the closest BS; ties resolve to the lowest index.
    pub fn nearest_cell(&self, p: &Point2) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, bs) in self.bs_positions.iter().enumerate() {
            let d = bs.distance(p);
            if d < best.0 - LATTICE_TOL {
                best = (d, i);
            }
        }
        best.1
    }

    /// True when `p` lies in the closed hexagonal region of `cell`.
    pub fn in_cell(&self, cell: usize, p: &Point2) -> bool {
        let bs = self.bs_positions[cell];
        let (dx, dy) = (p.x - bs.x, p.y - bs.y);
        let r = self.isd / 2.0 + LATTICE_TOL;
        (0..3).all(|k| {
            let a = k as f64 * PI / 3.0;
            (dx * a.cos() + dy * a.sin()).abs() <= r
        })
    }
}

/// Triangular lattice with spacing `isd`, ordered by distance from the
/// origin and then by bearing in [0, 2pi), truncated to `n_cells` sites.
pub fn build_lattice(n_cells: usize, isd: f64) -> Result<SitePlan> {
    if n_cells == 0 {
        return Err(SimError::config("n_cells", "must be at least 1"));
    }
    if !(isd > 0.0 && isd.is_finite()) {
        return Err(SimError::config("isd", format!("must be positive, got {isd}")));
    }
    let k = (n_cells as f64).sqrt().ceil() as i64 + 1;
    let radius = k as f64 * isd * 3f64.sqrt() / 2.0;
    let mut pts: Vec<(i64, f64, Point2)> = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let x = isd * (i as f64 + j as f64 / 2.0);
            let y = isd * j as f64 * 3f64.sqrt() / 2.0;
            let d = x.hypot(y);
            if d <= radius {
                let bearing = if d == 0.0 { 0.0 } else { y.atan2(x).rem_euclid(TAU) };
                // quantized so that lattice ties compare equal
                let dq = (d / isd * 1e6).round() as i64;
                pts.push((dq, bearing, Point2::new(x, y)));
            }
        }
    }
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(SitePlan {
        isd,
        bs_positions: pts.into_iter().take(n_cells).map(|p| p.2).collect(),
    })
}

/// Cells exactly one inter-site distance away, ascending by id.
pub fn first_tier_interferers(plan: &SitePlan, cell: usize) -> Vec<usize> {
    let me = plan.bs_positions[cell];
    plan.bs_positions
        .iter()
        .enumerate()
        .filter(|(i, p)| *i != cell && (p.distance(&me) - plan.isd).abs() <= LATTICE_TOL)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UeKind {
    CellEdge,
    UniformRandom,
}

impl std::fmt::Display for UeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UeKind::CellEdge => f.write_str("cell_edge"),
            UeKind::UniformRandom => f.write_str("uniform_random"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePlacement {
    pub ue_id: usize,
    pub cell: usize,
    pub position: Point2,
    pub kind: UeKind,
}

/// Per cell: one user on the ring of radius isd/2, the rest uniform over the
/// hexagon outside the minimum distance. User ids are `cell * users_per_cell + k`.
pub fn drop_users(plan: &SitePlan, users_per_cell: usize, seed: u64) -> Result<Vec<UePlacement>> {
    if users_per_cell == 0 {
        return Err(SimError::config("users_per_cell", "must be at least 1"));
    }
    let circumradius = plan.isd / 3f64.sqrt();
    let mut out = Vec::with_capacity(plan.n_cells() * users_per_cell);
    for (cell, bs) in plan.bs_positions.iter().enumerate() {
        let mut rng = substream(seed, Stream::Placement, &[cell as u64]);
        for k in 0..users_per_cell {
            let ue_id = cell * users_per_cell + k;
            let (position, kind) = if k == 0 {
                let a = rng.gen_range(0.0..TAU);
                let r = plan.isd / 2.0;
                (Point2::new(bs.x + r * a.cos(), bs.y + r * a.sin()), UeKind::CellEdge)
            } else {
                loop {
                    let p = Point2::new(
                        bs.x + rng.gen_range(-circumradius..circumradius),
                        bs.y + rng.gen_range(-circumradius..circumradius),
                    );
                    if p.distance(bs) >= MIN_UE_DISTANCE_M && plan.in_cell(cell, &p) {
                        break (p, UeKind::UniformRandom);
                    }
                }
            };
            out.push(UePlacement { ue_id, cell, position, kind });
        }
    }
    Ok(out)
}

/// Directional pattern parameterized by its half-power beamwidth. G_0, G_sl
/// and the main-lobe width are always derived from the beamwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalPattern {
    phi_3db: f64,
}

impl DirectionalPattern {
    /// `phi_3db` in radians, strictly inside (0, 2pi).
    pub fn new(phi_3db: f64) -> Result<Self> {
        if !(phi_3db > 0.0 && phi_3db < TAU) {
            return Err(SimError::config(
                "beam_phi_3db",
                format!("directional beamwidth must lie in (0, 2pi), got {phi_3db}"),
            ));
        }
        Ok(Self { phi_3db })
    }

    pub fn phi_3db(&self) -> f64 {
        self.phi_3db
    }

    /// Maximum gain G_0 in dB.
    pub fn g0(&self) -> f64 {
        10.0 * (1.6162 / (self.phi_3db / 2.0).sin()).powi(2).log10()
    }

    /// Side-lobe gain G_sl in dB.
    pub fn gsl(&self) -> f64 {
        -0.4111 * self.phi_3db.ln() - 10.579
    }

    /// Main-lobe width.
    pub fn phi_ml(&self) -> f64 {
        2.6 * self.phi_3db
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AntennaPattern {
    Directional(DirectionalPattern),
    Omni { gain_db: f64 },
}

impl AntennaPattern {
    /// A beamwidth of 2pi or more means omnidirectional operation.
    pub fn from_beamwidth(phi_3db: f64, omni_gain_db: f64) -> Result<Self> {
        if phi_3db >= TAU {
            Ok(AntennaPattern::Omni { gain_db: omni_gain_db })
        } else {
            DirectionalPattern::new(phi_3db).map(AntennaPattern::Directional)
        }
    }
}

/// Wrap an angle to (-pi, pi] and fold to [0, pi].
pub fn off_axis(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w.abs()
}

/// Gain in dB at angle `phi` off boresight.
pub fn antenna_gain(phi: f64, pattern: &AntennaPattern) -> f64 {
    match pattern {
        AntennaPattern::Omni { gain_db } => *gain_db,
        AntennaPattern::Directional(p) => {
            let phi = off_axis(phi);
            if phi <= p.phi_ml() / 2.0 {
                p.g0() - 3.01 * (2.0 * phi / p.phi_3db).powi(2)
            } else {
                p.gsl()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    pub id: usize,
    pub serving_bs: usize,
    pub served_ue: usize,
    pub boresight: f64,
    pub pattern: AntennaPattern,
}

impl Beam {
    /// Gain in dB towards `target`, seen from the serving BS.
    pub fn gain_towards(&self, plan: &SitePlan, target: &Point2) -> f64 {
        let bs = plan.bs_positions[self.serving_bs];
        antenna_gain(bs.bearing_to(target) - self.boresight, &self.pattern)
    }
}

/// One beam per user, pointed at it. Beam ids equal user ids.
pub fn form_beams(plan: &SitePlan, ues: &[UePlacement], pattern: AntennaPattern) -> Vec<Beam> {
    ues.iter()
        .map(|ue| Beam {
            id: ue.ue_id,
            serving_bs: ue.cell,
            served_ue: ue.ue_id,
            boresight: plan.bs_positions[ue.cell].bearing_to(&ue.position),
            pattern,
        })
        .collect()
}
