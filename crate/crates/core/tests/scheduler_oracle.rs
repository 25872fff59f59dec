use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fqam_sim::geometry::build_lattice;
use fqam_sim::modem::Modulation::{self, Fqam, Qam};
use fqam_sim::scheduler::{
    brute_force_space_assign, centralized_space_assign, classify_users, frequency_partition, BeamTable,
    ServiceProfile, Subband, Thresholds,
};
use fqam_sim::Result;

/// Random beam table plus a synthetic additive rate model: FQAM scales a
/// beam's own rate by a random factor and each FQAM aggressor adds a random
/// bonus to its victim.
struct Instance {
    table: BeamTable,
    qam_rate: Vec<f64>,
    fqam_factor: Vec<f64>,
    bonus: Vec<Vec<f64>>,
}

impl Instance {
    fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let mut aggressors = vec![Vec::new(); n];
        for (v, a) in aggressors.iter_mut().enumerate() {
            let k = rng.gen_range(0..4);
            while a.len() < k {
                let b = rng.gen_range(0..n);
                if b != v && !a.contains(&b) {
                    a.push(b);
                }
            }
            a.sort_unstable();
        }
        Instance {
            table: BeamTable {
                sinr_db: (0..n).map(|_| rng.gen_range(-10.0..20.0)).collect(),
                aggressors,
                profiles: (0..n).map(|_| ServiceProfile { lspl: rng.gen_range(0..3), rm: rng.gen_range(0.0..0.8) }).collect(),
            },
            qam_rate: (0..n).map(|_| rng.gen_range(0.5..4.0)).collect(),
            fqam_factor: (0..n).map(|_| rng.gen_range(0.2..1.1)).collect(),
            bonus: (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..2.0)).collect()).collect(),
        }
    }

    fn rates(&self, a: &[Modulation]) -> Result<Vec<f64>> {
        Ok((0..a.len())
            .map(|b| {
                let own = if a[b] == Fqam { self.qam_rate[b] * self.fqam_factor[b] } else { self.qam_rate[b] };
                own + self.table.aggressors[b].iter().filter(|&&x| a[x] == Fqam).map(|&x| self.bonus[b][x]).sum::<f64>()
            })
            .collect())
    }
}

#[test]
fn greedy_against_exhaustive_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let th = Thresholds { gamma_th_db: 3.0, n_th: 4 };
    let (mut greedy_total, mut optimum_total) = (0.0, 0.0);
    for _ in 0..100 {
        let inst = Instance::random(&mut rng, 8);
        let mut oracle = |a: &[Modulation]| inst.rates(a);
        let g = centralized_space_assign(&inst.table, &th, &mut oracle).unwrap();
        let b = brute_force_space_assign(&inst.table, &th, &mut oracle).unwrap();
        assert!(inst.table.is_feasible(&th, &g.modulation, &g.baseline_rates, &g.rates));
        assert!(inst.table.is_feasible(&th, &b.modulation, &b.baseline_rates, &b.rates));
        assert!(g.sum_rate() >= g.baseline_rates.iter().sum::<f64>());
        assert!(b.sum_rate() + 1e-12 >= g.sum_rate());
        let eligible = inst.table.eligible_victims(&th);
        for beam in g.fqam_beams() {
            assert!(eligible.iter().any(|&v| inst.table.aggressors[v].contains(&beam)));
        }
        assert_eq!(g, centralized_space_assign(&inst.table, &th, &mut oracle).unwrap());
        greedy_total += g.sum_rate();
        optimum_total += b.sum_rate();
    }
    assert!(greedy_total >= 0.9 * optimum_total, "{greedy_total} vs {optimum_total}");
}

#[test]
fn frequency_plan_invariants() {
    let plan = build_lattice(21, 1732.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let users: Vec<usize> = (0..42).map(|u| u / 2).collect();
        let sinrs: Vec<f64> = (0..42).map(|_| rng.gen_range(-10.0..20.0)).collect();
        let classes = classify_users(&sinrs, 0.0);
        let rho = rng.gen_range(0.05..0.95);
        let fp = frequency_partition(&plan, &users, &classes, rho).unwrap();
        assert!((fp.subband_fraction(Subband::Reserved) + fp.subband_fraction(Subband::Regular) - 1.0).abs() < 1e-12);
        for u in 0..42 {
            let reserved = fp.user_subband[u] == Subband::Reserved;
            assert_eq!(reserved, sinrs[u] < 0.0);
        }
        for c in 0..21 {
            assert_eq!(fp.modulation(c, Subband::Regular), Qam);
            let aggressor = fp
                .victim_cells
                .iter()
                .any(|&v| fqam_sim::geometry::first_tier_interferers(&plan, v).contains(&c));
            assert_eq!(fp.modulation(c, Subband::Reserved) == Fqam, aggressor);
        }
        assert!(fp.all_qam().reserved_modulation.iter().all(|m| *m == Qam));
    }
}
