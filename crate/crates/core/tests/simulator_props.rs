mod common;

use bellzoo::bell::{chsh, marginal_law_audit};
use bellzoo::simulators::{spheres_simulate, vessels_nonlocal_box, SphereExperimentConfig};
use common::rng;
use rand::Rng;
use std::f64::consts::TAU;

fn max_deviation(a: &bellzoo::BellData, b: &bellzoo::BellData) -> f64 {
    let mut out: f64 = 0.0;
    for (s, t) in a.tables().iter().zip(b.tables()) {
        for (p, q) in s.grid().iter().zip(t.grid()) {
            out = out.max((p - q).abs());
        }
    }
    out
}

#[test]
fn spheres_converge_to_analytic_tables() {
    let mut r = rng(2024);
    for run in 0..10u64 {
        let cfg = SphereExperimentConfig {
            angle_a: TAU * r.random::<f64>(),
            angle_a_prime: TAU * r.random::<f64>(),
            angle_b: TAU * r.random::<f64>(),
            angle_b_prime: TAU * r.random::<f64>(),
            trials: 1_000_000,
            seed: run,
        };
        let result = spheres_simulate(&cfg).unwrap();
        let dev = max_deviation(&result.empirical, result.analytic.as_ref().unwrap());
        assert!(dev < 0.005, "run {run}: deviation {dev}");
    }
}

#[test]
fn spheres_deterministic_per_seed() {
    let cfg = SphereExperimentConfig {
        angle_a: 0.2,
        angle_a_prime: 1.9,
        angle_b: 2.6,
        angle_b_prime: 0.7,
        trials: 20_000,
        seed: 11,
    };
    let a = spheres_simulate(&cfg).unwrap();
    let b = spheres_simulate(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn vessels_box_within_binomial_bounds() {
    let result = vessels_nonlocal_box(100_000, 1).unwrap();
    assert!((chsh(&result.empirical).max - 4.0).abs() < 0.02);
    assert!(marginal_law_audit(&result.empirical).iter().all(|m| m.deviation < 0.01));
    assert!(max_deviation(&result.empirical, result.analytic.as_ref().unwrap()) < 0.01);
    assert_eq!(result, vessels_nonlocal_box(100_000, 1).unwrap());
}
