//! Long seeded runs checked against the exact laws.

use ehrenfest::chain::{ChainParams, CountState};
use ehrenfest::exact::{
    evolve_distribution, stationary_count, total_variation, DistributionVector,
};
use ehrenfest::monte_carlo::{derive_replica_seed, run_occupancy, run_spatial};

fn occupancy_tv(p: &ChainParams, steps: u64, burn_in: u64, seed: u64) -> f64 {
    let h = run_occupancy(p, CountState::new(0), steps, burn_in, seed).unwrap();
    let empirical = DistributionVector::new(h.frequencies()).unwrap();
    total_variation(&empirical, &stationary_count(p).unwrap()).unwrap()
}

#[test]
fn occupancy_matches_binomial() {
    let p = ChainParams::new(50, 0.7).unwrap();
    let tv = occupancy_tv(&p, 10_000_000, 10_000, 99);
    assert!(tv < 0.01, "tv = {tv}");
}

#[test]
fn derived_replica_seeds_drive_good_runs() {
    let p = ChainParams::new(20, 0.4).unwrap();
    for r in 0..4 {
        let tv = occupancy_tv(&p, 2_000_000, 2_000, derive_replica_seed(5, r));
        assert!(tv < 0.01, "replica {r}: tv = {tv}");
    }
}

#[test]
fn two_site_spatial_chain_is_uniform() {
    let p = ChainParams::new(2, 0.5).unwrap();
    let run = run_spatial(&p, 1_000_000, 100, 2, 17).unwrap();
    let samples = run.marginals.samples as f64;
    let sigma = (0.25 * 0.75 / samples).sqrt();
    for count in run.config_histogram.unwrap() {
        assert!((count as f64 / samples - 0.25).abs() < 6.0 * sigma);
    }
}

#[test]
fn tv_decays_toward_zero_from_both_ends() {
    let p = ChainParams::new(30, 0.8).unwrap();
    let nu = stationary_count(&p).unwrap();
    for start in [0, 30] {
        let d0 = DistributionVector::point_mass(30, start).unwrap();
        let tvs: Vec<f64> = [0u64, 50, 200, 800]
            .iter()
            .map(|&t| total_variation(&evolve_distribution(&p, &d0, t).unwrap(), &nu).unwrap())
            .collect();
        assert!(tvs.windows(2).all(|w| w[1] < w[0]), "{tvs:?}");
        assert!(tvs[3] < 1e-9);
    }
}
