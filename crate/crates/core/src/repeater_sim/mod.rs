//! Monte-Carlo simulation of a nested purification and swapping chain.
//!
//! ```
//! use repeaterlab::repeater_sim::{self, ChainConfig};
//!
//! let config = ChainConfig::new(40.0, 10.0)?.with_seed(1);
//! let result = repeater_sim::run(config)?;
//! assert_eq!(result.arrival_times.len(), 9);
//! assert!(result.first_arrival_ms().unwrap() >= 40.0 / 200.0);
//! # Ok::<(), repeaterlab::Error>(())
//! ```

mod config;
mod engine;
mod lineage;
mod queue;
mod result;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    default_schedule, nesting_levels, qubit_budget, ChainConfig, LinkModel, NoiseConfig, ProbeConfig, SchedulePreset,
    DEFAULT_FIBER_LOSS_DB_PER_KM, DEFAULT_LIGHT_SPEED_KM_PER_MS, DEFAULT_P_C, DEFAULT_TARGET_PAIRS,
};
pub use engine::{PairRecord, Simulation};
pub use lineage::{replay, DeliveredPair, Lineage};
pub use result::{interarrival_times, mean_std, SimResult};

use crate::Result;
use result::Summary;

/// Run one simulation to `config.target_pairs` deliveries.
pub fn run(config: ChainConfig) -> Result<SimResult> {
    Simulation::new(config)?.run()
}

/// Results for one ε of a sweep. Statistics pool the interarrival gaps and
/// fidelities of every run at this point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    /// Seed of the first run; run `r` uses `seed + r`.
    pub seed: u64,
    pub rate_hz: f64,
    pub rate_std_hz: f64,
    pub mean_final_fidelity: f64,
    pub std_final_fidelity: f64,
    pub runs: Vec<SimResult>,
}

/// Seed used for run `run` at sweep index `point`.
pub fn sweep_seed(base: u64, point: usize, run: usize, runs_per_point: usize) -> u64 {
    base.wrapping_add((point * runs_per_point + run) as u64)
}

/// Run `config` once per `(ε, run)` in parallel; points come back in input
/// order.
pub fn sweep_epsilon(config: &ChainConfig, epsilons: &[f64], runs_per_point: usize) -> Result<Vec<SweepPoint>> {
    if runs_per_point == 0 {
        return Err(crate::Error::param("runs_per_point", "must be at least 1"));
    }
    let jobs: Vec<(usize, usize)> = (0..epsilons.len())
        .flat_map(|k| (0..runs_per_point).map(move |r| (k, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(k, r)| {
            let seed = sweep_seed(config.rng_seed, k, r, runs_per_point);
            run(config.clone().with_epsilon(epsilons[k]).with_seed(seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut results = results.into_iter();
    Ok(epsilons
        .iter()
        .enumerate()
        .map(|(k, &epsilon)| {
            let runs: Vec<SimResult> = results.by_ref().take(runs_per_point).collect();
            let gaps: Vec<f64> = runs.iter().flat_map(SimResult::interarrival_times).collect();
            let fids: Vec<f64> = runs.iter().flat_map(|r| r.fidelities.iter().copied()).collect();
            let s = Summary::from_samples(&gaps, &fids);
            SweepPoint {
                epsilon,
                seed: sweep_seed(config.rng_seed, k, 0, runs_per_point),
                rate_hz: s.rate_hz,
                rate_std_hz: s.rate_std_hz,
                mean_final_fidelity: s.mean_final_fidelity,
                std_final_fidelity: s.std_final_fidelity,
                runs,
            }
        })
        .collect())
}
