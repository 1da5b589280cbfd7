use gridformer_converter::{build_admittance, Architecture, ArchKind, OperatingPoint, OMEGA0};
use gridformer_lti::FrequencyGrid;
use gridformer_network::{Branch, NetworkModel};
use gridformer_strength::*;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixed_seed(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_network(rng: &mut ChaCha8Rng, max_n: usize, uniform: bool) -> NetworkModel {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=2);
    let nb = n + m;
    let tau0 = rng.random_range(0.05..0.2);
    let tau = |rng: &mut ChaCha8Rng| if uniform { tau0 } else { rng.random_range(0.05..0.2) };
    let mut branches = Vec::new();
    for k in 1..nb {
        let to = rng.random_range(0..k);
        let t = tau(rng);
        branches.push(Branch { from: k, to, b: rng.random_range(1.0..10.0), tau: t });
    }
    for _ in 0..rng.random_range(0..=nb) {
        let (a, b) = (rng.random_range(0..nb), rng.random_range(0..nb));
        if a != b {
            let t = tau(rng);
            branches.push(Branch { from: a, to: b, b: rng.random_range(1.0..10.0), tau: t });
        }
    }
    let grounded = rng.random_range(0..nb);
    let t = tau(rng);
    branches.push(Branch { from: grounded, to: nb, b: rng.random_range(2.0..10.0), tau: t });
    let caps = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    NetworkModel::new(n, m, branches, caps, OMEGA0).unwrap()
}

/// Forming devices linearised at no load, one random architecture per bus.
fn random_system(seed: u64, uniform: bool) -> PowerSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_network(&mut rng, 4, uniform);
    let kinds = [ArchKind::Vsg, ArchKind::Droop, ArchKind::Voc, ArchKind::None];
    let op = OperatingPoint::no_load(1.0);
    let devices = (0..net.n())
        .map(|_| {
            let k = kinds[rng.random_range(0..kinds.len())];
            build_admittance(&Architecture::default_for(k), &op, OMEGA0).unwrap()
        })
        .collect();
    PowerSystem::new(net.clone(), devices, vec![op; net.n()]).unwrap()
}

fn grid() -> FrequencyGrid {
    FrequencyGrid::log_hz(1.0, 300.0, 16).unwrap()
}

#[test]
fn gscr_never_below_smallest_escr() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let net = random_network(&mut rng, 6, false);
        let g = gscr(&net).unwrap();
        let e = escr(&net).unwrap().into_iter().fold(f64::INFINITY, f64::min);
        assert!(g >= e - 1e-10 * e.max(1.0), "gSCR {g} < min ESCR {e}");
    }
}

#[test]
fn alpha_lower_bound_holds_on_random_systems() {
    for seed in 0..20 {
        let sys = random_system(seed, seed % 2 == 0);
        let k = system_strength(|w| sys.y_cl(w), &grid()).unwrap();
        let a = grid_strength(sys.grid_operator(), &grid()).unwrap();
        for c in check_prop1(&k, &a, sys.devices(), sys.grid_operator()).unwrap() {
            assert!(c.holds, "seed {seed}: {c:?}");
        }
    }
}

proptest! {
    #![proptest_config(fixed_seed(24))]

    #[test]
    fn kappa_bounded_below_by_weakest_bus(seed in any::<u64>()) {
        let sys = random_system(seed, false);
        let r = strength_report(&sys, &grid(), Thresholds::default()).unwrap();
        for k in 0..grid().len() {
            let min_bus = r.bus.iter().map(|c| c.values()[k]).fold(f64::INFINITY, f64::min);
            prop_assert!(r.kappa.values()[k] >= min_bus - 1e-10);
        }
        for (p, k) in r.passivity.values().iter().zip(r.kappa.values()) {
            prop_assert!(*p <= k + 1e-10);
        }
        let mut sorted = r.ranking.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..sys.net().n()).collect::<Vec<_>>());
    }

    #[test]
    fn uniform_grid_strength_is_flat_gscr(seed in any::<u64>()) {
        let sys = random_system(seed, true);
        let a = grid_strength(sys.grid_operator(), &grid()).unwrap();
        let g = gscr(sys.net()).unwrap();
        for v in a.values() {
            prop_assert!((v - g).abs() <= 1e-9 * g.max(1.0));
        }
    }
}
