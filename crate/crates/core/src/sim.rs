//! Seeded Monte Carlo validation of the average decoded rate.
//!
//! Each trial draws an independent joint fading state (the two users'
//! levels are independent, identically distributed per the model) and
//! credits the total rate of the streams decoded there per the decode
//! table. The empirical mean is compared against the closed-form
//! expectation through a z-score.
//!
//! Randomness is counter-based so the sequence is reproducible from the
//! seed alone and independent of how trials are partitioned across
//! workers: draw `i` of trial `t` (`i` in `{0, 1}`) is
//! `mix(seed + (2*t + i + 1) * 0x9E3779B97F4A7C15)` where `mix` is the
//! splitmix64 finalizer, mapped to `[0, 1)` via the top 53 bits. Draw 0
//! selects user 1's level, draw 1 user 2's, both by inverse CDF over
//! the model's state probabilities.

use std::collections::BTreeMap;

use crate::channel::{ChannelModel, PowerAllocation, RateVector};
use crate::error::{Error, Result};
use crate::multi_state::{self, decode_table};
use crate::opt::average_rate_general;

/// Identifier of the random generator recorded in every report.
pub const GENERATOR_ID: &str = "splitmix64-counter/u53";

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `index`-th draw of the stream seeded by `seed`, uniform on `[0, 1)`.
pub fn unit_sample(seed: u64, index: u64) -> f64 {
    let z = mix(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)));
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Simulation inputs. Rates must be achievable at the allocation; this
/// is checked before any sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub model: ChannelModel,
    pub rates: RateVector,
    pub allocation: PowerAllocation,
}

/// Simulation outcome. `per_state_counts` is keyed by `(p, q)` with `p`
/// = user 2's level and `q` = user 1's level; the counts sum to
/// `trials`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub empirical_mean: f64,
    pub std_error: f64,
    pub formula_value: f64,
    pub z_score: f64,
    pub per_state_counts: BTreeMap<(usize, usize), u64>,
    pub trials: u64,
    pub seed: u64,
    pub generator: String,
}

/// Run the simulation described by `cfg`.
///
/// Fully reproducible: equal configs give identical reports, and the
/// counter-based draws make the outcome independent of any trial
/// partitioning.
pub fn run_sim(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.trials == 0 {
        return Err(Error::NoTrials);
    }
    cfg.model.validate()?;
    cfg.allocation.validate()?;
    let ell = cfg.model.ell();
    if cfg.rates.ell() != ell || cfg.allocation.ell() != ell {
        return Err(Error::DimensionMismatch(format!(
            "model ell = {}, rates ell = {}, allocation ell = {}",
            ell,
            cfg.rates.ell(),
            cfg.allocation.ell()
        )));
    }

    // gate on achievability before sampling anything
    let region = if ell == 2 {
        crate::two_state::rate_region(&cfg.model, &cfg.allocation)?
    } else {
        multi_state::rate_region(&cfg.model, &cfg.allocation)?
    };
    let violated = region.violations(&cfg.rates, 1e-9)?;
    if !violated.is_empty() {
        return Err(Error::InfeasibleRates(
            violated
                .iter()
                .map(|c| format!("{} > {}", c.label(ell), c.bound))
                .collect(),
        ));
    }

    let table = decode_table(ell)?;
    // per-state decoded rate, indexed (p-1)*ell + (q-1)
    let mut state_rate = vec![0.0f64; ell * ell];
    for p in 1..=ell {
        for q in 1..=ell {
            state_rate[(p - 1) * ell + (q - 1)] = table.rate_sum(p, q, &cfg.rates);
        }
    }
    let mut cdf = vec![0.0f64; ell];
    let mut acc = 0.0;
    for (i, c) in cdf.iter_mut().enumerate() {
        acc += cfg.model.prob(i + 1);
        *c = acc;
    }
    let draw_level = |u: f64| -> usize {
        for (i, &c) in cdf.iter().enumerate() {
            if u < c {
                return i + 1;
            }
        }
        ell
    };

    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for t in 0..cfg.trials {
        let q = draw_level(unit_sample(cfg.seed, 2 * t)); // user 1
        let p = draw_level(unit_sample(cfg.seed, 2 * t + 1)); // user 2
        *counts.entry((p, q)).or_insert(0) += 1;
    }

    // the per-trial value takes at most ell^2 distinct values, so the
    // sample moments are exact sums over the state counts
    let n = cfg.trials as f64;
    let rate_of = |(p, q): (usize, usize)| state_rate[(p - 1) * ell + (q - 1)];
    let empirical_mean: f64 = counts
        .iter()
        .map(|(&s, &c)| (c as f64 / n) * rate_of(s))
        .sum();
    let variance = if cfg.trials > 1 {
        let ssq: f64 = counts
            .iter()
            .map(|(&s, &c)| {
                let d = rate_of(s) - empirical_mean;
                c as f64 * d * d
            })
            .sum();
        (ssq / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let std_error = (variance / n).sqrt();
    let formula_value = average_rate_general(&cfg.model, &cfg.rates, &table)?;
    let z_score = if std_error > 0.0 {
        (empirical_mean - formula_value) / std_error
    } else {
        0.0
    };

    Ok(SimReport {
        empirical_mean,
        std_error,
        formula_value,
        z_score,
        per_state_counts: counts,
        trials: cfg.trials,
        seed: cfg.seed,
        generator: GENERATOR_ID.to_string(),
    })
}
