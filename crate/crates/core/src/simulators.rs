//! Classical mechanisms that produce Bell-violating coincidence statistics:
//! the connected-spheres elastic model, the connected vessels of water in
//! two variants, and the Glimmer / Inkling gedanken experiment.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, one stream per
//! run, consumed context-major (AB, AB′, A′B, A′B′) and trial-minor with a
//! fixed number of `f64` draws per trial, so a run is reproducible from
//! `(seed, trials, angles)` on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{BellData, Context, JointTable};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereExperimentConfig {
    /// Measurement directions in the plane, radians.
    pub angle_a: f64,
    pub angle_a_prime: f64,
    pub angle_b: f64,
    pub angle_b_prime: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SphereExperimentConfig {
    pub fn angles_for(&self, context: Context) -> (f64, f64) {
        match context {
            Context::AB => (self.angle_a, self.angle_b),
            Context::ABPrime => (self.angle_a, self.angle_b_prime),
            Context::APrimeB => (self.angle_a_prime, self.angle_b),
            Context::APrimeBPrime => (self.angle_a_prime, self.angle_b_prime),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trials: u64,
    pub seed: u64,
    /// Per context, counts on the (11, 12, 21, 22) grid.
    pub counts: [[u64; 4]; 4],
    pub empirical: BellData,
    pub analytic: Option<BellData>,
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    Ok(())
}

fn grid_index(a_plus: bool, b_plus: bool) -> usize {
    match (a_plus, b_plus) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

fn empirical_from_counts(counts: &[[u64; 4]; 4], trials: u64) -> BellData {
    let n = trials as f64;
    BellData::from_grids(counts.map(|row| row.map(|k| k as f64 / n)))
        .expect("count tables are normalized")
}

/// Joint table of the spheres model at angle γ between the directions:
/// `(½sin²(γ/2), ½cos²(γ/2), ½cos²(γ/2), ½sin²(γ/2))`, so E = −cos γ.
pub fn spheres_analytic(gamma: f64) -> JointTable {
    let s = 0.5 * (gamma / 2.0).sin().powi(2);
    let c = 0.5 * (gamma / 2.0).cos().powi(2);
    JointTable::from_grid([s, c, c, s]).expect("analytic table is normalized")
}

pub fn spheres_analytic_data(cfg: &SphereExperimentConfig) -> BellData {
    BellData::new(Context::ALL.map(|ctx| {
        let (x, y) = cfg.angles_for(ctx);
        spheres_analytic(x - y)
    }))
    .with_label("spheres (analytic)")
}

/// One run of the elastic mechanism. Per trial two uniform draws:
///
/// 1. The first elastic breaks at `u₁ ∈ [−1, 1)`; the particle sits at the
///    centre, so it goes to `+a` iff `u₁ < 0`.
/// 2. The rod pushes the second particle to the antipode of the first. Its
///    orthogonal projection onto the `b` elastic lies at `−cos γ` if the
///    first went to `+a` and at `+cos γ` otherwise. The second elastic
///    breaks at `u₂ ∈ [−1, 1)` and the particle goes to `+b` iff `u₂` falls
///    between `−b` and the particle.
pub fn spheres_simulate(cfg: &SphereExperimentConfig) -> Result<SimulationResult> {
    check_trials(cfg.trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = [[0u64; 4]; 4];
    for ctx in Context::ALL {
        let (x, y) = cfg.angles_for(ctx);
        let cos_gamma = (x - y).cos();
        let row = &mut counts[ctx.index()];
        for _ in 0..cfg.trials {
            let u1 = 2.0 * rng.random::<f64>() - 1.0;
            let u2 = 2.0 * rng.random::<f64>() - 1.0;
            let a_plus = u1 < 0.0;
            let position = if a_plus { -cos_gamma } else { cos_gamma };
            let b_plus = u2 < position;
            row[grid_index(a_plus, b_plus)] += 1;
        }
    }
    Ok(SimulationResult {
        trials: cfg.trials,
        seed: cfg.seed,
        counts,
        empirical: empirical_from_counts(&counts, cfg.trials).with_label("spheres (empirical)"),
        analytic: Some(spheres_analytic_data(cfg)),
    })
}

/// Connected vessels with 20 liters of transparent water. Siphons on both
/// sides split the water around 10 liters with strict anticorrelation; a
/// lone siphon drains all 20 liters; spoon checks always see transparent
/// water.
pub fn vessels_deterministic() -> BellData {
    BellData::from_grids([
        [0.0, 0.5, 0.5, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ])
    .expect("tables are normalized")
    .with_label("vessels")
}

/// Exact tables of the nonlocal-box vessels variant (and of the cats
/// gedanken experiment): AB anticorrelated, every other context perfectly
/// correlated, all single-side marginals ½.
pub fn vessels_nonlocal_box_analytic() -> BellData {
    BellData::from_grids([
        [0.0, 0.5, 0.5, 0.0],
        [0.5, 0.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 0.5],
    ])
    .expect("tables are normalized")
    .with_label("vessels nonlocal box (analytic)")
}

/// Nonlocal-box variant of the vessels. Per trial two uniform draws: the
/// transparency bit of the equal-weight mixture (`u₁ < ½`), then the
/// siphon split `v = 20 u₂` liters on the left and `20 − v` on the right.
///
/// * Unprimed settings siphon and check: `+1` iff (more than 10 liters and
///   transparent) or (fewer than 10 and not transparent). When the other
///   side does not siphon, this side collects all 20 liters.
/// * Primed settings spoon-check: `+1` iff transparent.
pub fn vessels_nonlocal_box(trials: u64, seed: u64) -> Result<SimulationResult> {
    check_trials(trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [[0u64; 4]; 4];
    for ctx in Context::ALL {
        let row = &mut counts[ctx.index()];
        let both_siphon = ctx == Context::AB;
        for _ in 0..trials {
            let transparent = rng.random::<f64>() < 0.5;
            let split = 20.0 * rng.random::<f64>();
            let (left_volume, right_volume) = if both_siphon { (split, 20.0 - split) } else { (20.0, 20.0) };
            let siphon = |volume: f64| (volume > 10.0) == transparent;
            let (a_plus, b_plus) = match ctx {
                Context::AB => (siphon(left_volume), siphon(right_volume)),
                Context::ABPrime => (siphon(left_volume), transparent),
                Context::APrimeB => (transparent, siphon(right_volume)),
                Context::APrimeBPrime => (transparent, transparent),
            };
            row[grid_index(a_plus, b_plus)] += 1;
        }
    }
    Ok(SimulationResult {
        trials,
        seed,
        counts,
        empirical: empirical_from_counts(&counts, trials).with_label("vessels nonlocal box (empirical)"),
        analytic: Some(vessels_nonlocal_box_analytic()),
    })
}

/// Glimmer and Inkling: both cats wear bells or neither does (probability
/// ½). AB anticorrelates; AB′, A′B, A′B′ correlate perfectly.
pub fn cats_gedanken() -> BellData {
    BellData::from_grids([
        [0.0, 0.5, 0.5, 0.0],
        [0.5, 0.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 0.5],
    ])
    .expect("tables are normalized")
    .with_label("cats")
}
