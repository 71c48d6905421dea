use serde::{Deserialize, Serialize};

use crate::bell_algebra::{BellDiagonalState, GateNoise};
use crate::probe_model::{self, GammaForm, ProbeParams, DEFAULT_THETA};
use crate::{Error, Result};

pub const DEFAULT_FIBER_LOSS_DB_PER_KM: f64 = 0.17;
pub const DEFAULT_LIGHT_SPEED_KM_PER_MS: f64 = 200.0;
pub const DEFAULT_TARGET_PAIRS: usize = 9;
pub const DEFAULT_P_C: f64 = 0.5;

fn default_p_c() -> f64 {
    DEFAULT_P_C
}
fn default_theta() -> f64 {
    DEFAULT_THETA
}
fn default_loss() -> f64 {
    DEFAULT_FIBER_LOSS_DB_PER_KM
}
fn default_light_speed() -> f64 {
    DEFAULT_LIGHT_SPEED_KM_PER_MS
}
fn default_target_pairs() -> usize {
    DEFAULT_TARGET_PAIRS
}
fn yes() -> bool {
    true
}

/// How each segment's link is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_p_c")]
    pub p_c: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Fixed distinguishability; `null` uses the fidelity-optimal value for
    /// `p_c` and the segment transmission.
    #[serde(default)]
    pub distinguishability: Option<f64>,
    #[serde(default)]
    pub retain_xi: bool,
    /// Replace the modelled link success probability.
    #[serde(default)]
    pub success_probability_override: Option<f64>,
    /// Replace the modelled link state.
    #[serde(default)]
    pub link_state_override: Option<BellDiagonalState>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            p_c: DEFAULT_P_C,
            theta: DEFAULT_THETA,
            distinguishability: None,
            retain_xi: false,
            success_probability_override: None,
            link_state_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub epsilon: f64,
    /// Apply gate noise to purification gates.
    #[serde(default = "yes")]
    pub on_purification: bool,
    /// Apply gate noise to swapping gates.
    #[serde(default = "yes")]
    pub on_swap: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            epsilon: 0.0,
            on_purification: true,
            on_swap: true,
        }
    }
}

impl NoiseConfig {
    pub fn purification(&self) -> GateNoise {
        if self.on_purification {
            GateNoise { epsilon: self.epsilon }
        } else {
            GateNoise::IDEAL
        }
    }

    pub fn swap(&self) -> GateNoise {
        if self.on_swap {
            GateNoise { epsilon: self.epsilon }
        } else {
            GateNoise::IDEAL
        }
    }
}

/// Config as written on disk: optional fields are filled in by
/// [`ChainConfig::try_from`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChainConfig {
    total_length_km: f64,
    segment_length_km: f64,
    #[serde(default)]
    qubits_per_station: Option<usize>,
    #[serde(default = "default_loss")]
    fiber_loss_db_per_km: f64,
    #[serde(default)]
    probe: ProbeConfig,
    #[serde(default)]
    noise: NoiseConfig,
    #[serde(default)]
    purification_schedule: Option<Vec<u32>>,
    #[serde(default = "default_light_speed")]
    light_speed_km_per_ms: f64,
    #[serde(default = "default_target_pairs")]
    target_pairs: usize,
    #[serde(default)]
    rng_seed: u64,
}

/// Fully resolved description of one repeater chain experiment.
///
/// Deserialising fills in defaults and validates; serialising writes every
/// field, so a dumped config reparses to the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChainConfig")]
pub struct ChainConfig {
    pub total_length_km: f64,
    pub segment_length_km: f64,
    pub qubits_per_station: usize,
    pub fiber_loss_db_per_km: f64,
    pub probe: ProbeConfig,
    pub noise: NoiseConfig,
    /// Purification rounds per nesting level before that level's swap, with
    /// one trailing entry for the end-to-end pair.
    pub purification_schedule: Vec<u32>,
    pub light_speed_km_per_ms: f64,
    pub target_pairs: usize,
    pub rng_seed: u64,
}

/// Minimum qubits per station for nested purification and swapping over
/// `total / segment` segments: `2 + 2·log₂(total/segment)`.
pub fn qubit_budget(total_length_km: f64, segment_length_km: f64) -> Result<usize> {
    Ok(2 + 2 * nesting_levels(total_length_km, segment_length_km)? as usize)
}

/// `log₂(total/segment)`, which must be a whole number.
pub fn nesting_levels(total_length_km: f64, segment_length_km: f64) -> Result<u32> {
    if !(total_length_km > 0.0 && segment_length_km > 0.0) {
        return Err(Error::param("length", "lengths must be positive"));
    }
    let ratio = total_length_km / segment_length_km;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) || rounded < 1.0 {
        return Err(Error::NotPowerOfTwo { ratio });
    }
    let n = rounded as u64;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { ratio });
    }
    Ok(n.trailing_zeros())
}

/// Named purification schedules. Both front-load rounds on short spans, where
/// they are cheap, and leave the long spans unpurified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePreset {
    /// Rounds `3, 2, 1, 1` on the lowest levels; about 0.95 at 1280 km.
    Balanced,
    /// Rounds `3, 2, 2, 1` on the lowest levels; about 0.99 at 1280 km.
    Deep,
}

impl SchedulePreset {
    pub fn schedule(self, levels: u32) -> Vec<u32> {
        let head: &[u32] = match self {
            SchedulePreset::Balanced => &[3, 2, 1, 1],
            SchedulePreset::Deep => &[3, 2, 2, 1],
        };
        (0..=levels as usize).map(|k| head.get(k).copied().unwrap_or(0)).collect()
    }
}

/// Schedule used when a config leaves `purification_schedule` unset.
pub fn default_schedule(levels: u32) -> Vec<u32> {
    SchedulePreset::Deep.schedule(levels)
}

impl TryFrom<RawChainConfig> for ChainConfig {
    type Error = Error;

    fn try_from(raw: RawChainConfig) -> Result<Self> {
        if !(raw.total_length_km.is_finite() && raw.total_length_km > 0.0) {
            return Err(Error::config("total_length_km", "must be a positive length"));
        }
        if !(raw.segment_length_km.is_finite() && raw.segment_length_km > 0.0) {
            return Err(Error::config("segment_length_km", "must be a positive length"));
        }
        let levels = nesting_levels(raw.total_length_km, raw.segment_length_km).map_err(|_| {
            Error::config(
                "segment_length_km",
                format!(
                    "total_length_km / segment_length_km = {} is not a power of two",
                    raw.total_length_km / raw.segment_length_km
                ),
            )
        })?;
        let budget = 2 + 2 * levels as usize;
        let defaulted_schedule = raw.purification_schedule.is_none();
        let schedule = raw.purification_schedule.unwrap_or_else(|| default_schedule(levels));
        if schedule.len() != levels as usize + 1 {
            return Err(Error::config(
                "purification_schedule",
                format!("needs {} entries (one per nesting level plus the final pair), got {}", levels + 1, schedule.len()),
            ));
        }
        let qubits = raw.qubits_per_station.unwrap_or(budget);
        if qubits < 2 {
            return Err(Error::config("qubits_per_station", "needs at least 2 qubits"));
        }
        if defaulted_schedule && qubits < budget {
            return Err(Error::config(
                "qubits_per_station",
                format!("the default schedule needs at least {budget} qubits per station, got {qubits}"),
            ));
        }
        if !(raw.fiber_loss_db_per_km.is_finite() && raw.fiber_loss_db_per_km >= 0.0) {
            return Err(Error::config("fiber_loss_db_per_km", "must be finite and >= 0"));
        }
        if !(raw.light_speed_km_per_ms.is_finite() && raw.light_speed_km_per_ms > 0.0) {
            return Err(Error::config("light_speed_km_per_ms", "must be positive"));
        }
        if raw.target_pairs == 0 {
            return Err(Error::config("target_pairs", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&raw.noise.epsilon) {
            return Err(Error::config("epsilon", "must lie in [0, 1)"));
        }
        let probe = &raw.probe;
        if !(probe.p_c.is_finite() && probe.p_c > 0.0) {
            return Err(Error::config("p_c", "must be positive"));
        }
        if !(probe.theta > 0.0 && probe.theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::config("theta", "must lie in (0, pi/2)"));
        }
        if let Some(d) = probe.distinguishability {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::config("distinguishability", "must be positive"));
            }
        }
        if let Some(p) = probe.success_probability_override {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::config("success_probability_override", "must lie in (0, 1]"));
            }
        }
        Ok(ChainConfig {
            total_length_km: raw.total_length_km,
            segment_length_km: raw.segment_length_km,
            qubits_per_station: qubits,
            fiber_loss_db_per_km: raw.fiber_loss_db_per_km,
            probe: raw.probe,
            noise: raw.noise,
            purification_schedule: schedule,
            light_speed_km_per_ms: raw.light_speed_km_per_ms,
            target_pairs: raw.target_pairs,
            rng_seed: raw.rng_seed,
        })
    }
}

impl ChainConfig {
    /// A chain with every optional setting at its default.
    pub fn new(total_length_km: f64, segment_length_km: f64) -> Result<Self> {
        RawChainConfig {
            total_length_km,
            segment_length_km,
            qubits_per_station: None,
            fiber_loss_db_per_km: DEFAULT_FIBER_LOSS_DB_PER_KM,
            probe: ProbeConfig::default(),
            noise: NoiseConfig::default(),
            purification_schedule: None,
            light_speed_km_per_ms: DEFAULT_LIGHT_SPEED_KM_PER_MS,
            target_pairs: DEFAULT_TARGET_PAIRS,
            rng_seed: 0,
        }
        .try_into()
    }

    /// Re-run validation after fields were edited in place.
    pub fn validated(self) -> Result<Self> {
        RawChainConfig {
            total_length_km: self.total_length_km,
            segment_length_km: self.segment_length_km,
            qubits_per_station: Some(self.qubits_per_station),
            fiber_loss_db_per_km: self.fiber_loss_db_per_km,
            probe: self.probe,
            noise: self.noise,
            purification_schedule: Some(self.purification_schedule),
            light_speed_km_per_ms: self.light_speed_km_per_ms,
            target_pairs: self.target_pairs,
            rng_seed: self.rng_seed,
        }
        .try_into()
    }

    pub fn segments(&self) -> usize {
        (self.total_length_km / self.segment_length_km).round() as usize
    }

    pub fn levels(&self) -> u32 {
        self.segments().trailing_zeros()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.noise.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_schedule(mut self, schedule: Vec<u32>) -> Self {
        self.purification_schedule = schedule;
        self
    }

    pub fn with_preset(self, preset: SchedulePreset) -> Self {
        let levels = self.levels();
        self.with_schedule(preset.schedule(levels))
    }
}

/// Elementary link as seen by the simulator: identical for every segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    /// Power transmission of one segment.
    pub eta_sq: f64,
    pub distinguishability: f64,
    pub success_probability: f64,
    pub state: BellDiagonalState,
}

impl LinkModel {
    pub fn resolve(config: &ChainConfig) -> Result<Self> {
        let eta_sq = probe_model::fiber_transmission(config.segment_length_km, config.fiber_loss_db_per_km);
        let eta = eta_sq.sqrt();
        let probe = &config.probe;
        let d = match probe.distinguishability {
            Some(d) => d,
            None => probe_model::optimize_distinguishability(probe.p_c, eta)?.d_opt,
        };
        let params = ProbeParams::from_distinguishability(d, probe.theta, eta, probe.p_c)?
            .with_gamma_form(GammaForm::SmallAngle)
            .with_retained_xi(probe.retain_xi);
        let success_probability = probe
            .success_probability_override
            .unwrap_or_else(|| probe_model::success_probability(&params));
        let state = match probe.link_state_override {
            Some(s) => s,
            None => probe_model::postselected_state(&params)?,
        };
        Ok(LinkModel {
            eta_sq,
            distinguishability: d,
            success_probability,
            state,
        })
    }
}
