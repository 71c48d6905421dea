use serde::{Deserialize, Serialize};

use super::config::{ChainConfig, LinkModel};

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub seed: u64,
    /// Delivery times of end-to-end pairs (ms), strictly increasing.
    pub arrival_times: Vec<f64>,
    /// `Ψ⁺` fidelity of each delivered pair, in arrival order.
    pub fidelities: Vec<f64>,
    pub mean_interarrival_ms: f64,
    pub std_interarrival_ms: f64,
    pub rate_hz: f64,
    pub rate_std_hz: f64,
    pub mean_final_fidelity: f64,
    pub std_final_fidelity: f64,
    pub events_processed: u64,
    pub link: LinkModel,
    pub config: ChainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Summary {
    pub mean_interarrival_ms: f64,
    pub std_interarrival_ms: f64,
    pub rate_hz: f64,
    pub rate_std_hz: f64,
    pub mean_final_fidelity: f64,
    pub std_final_fidelity: f64,
}

/// Gaps between consecutive arrivals; a lone arrival counts from time zero.
pub fn interarrival_times(arrivals: &[f64]) -> Vec<f64> {
    match arrivals {
        [] => Vec::new(),
        [only] => vec![*only],
        _ => arrivals.windows(2).map(|w| w[1] - w[0]).collect(),
    }
}

/// Mean and sample standard deviation (zero for fewer than two samples).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl Summary {
    pub fn from_samples(interarrivals: &[f64], fidelities: &[f64]) -> Self {
        let (mean_ia, std_ia) = mean_std(interarrivals);
        let (mean_f, std_f) = mean_std(fidelities);
        let rate_hz = 1000.0 / mean_ia;
        Summary {
            mean_interarrival_ms: mean_ia,
            std_interarrival_ms: std_ia,
            rate_hz,
            rate_std_hz: rate_hz * std_ia / mean_ia,
            mean_final_fidelity: mean_f,
            std_final_fidelity: std_f,
        }
    }
}

impl SimResult {
    pub(crate) fn new(
        seed: u64,
        arrival_times: Vec<f64>,
        fidelities: Vec<f64>,
        events_processed: u64,
        link: LinkModel,
        config: ChainConfig,
    ) -> Self {
        let s = Summary::from_samples(&interarrival_times(&arrival_times), &fidelities);
        SimResult {
            seed,
            arrival_times,
            fidelities,
            mean_interarrival_ms: s.mean_interarrival_ms,
            std_interarrival_ms: s.std_interarrival_ms,
            rate_hz: s.rate_hz,
            rate_std_hz: s.rate_std_hz,
            mean_final_fidelity: s.mean_final_fidelity,
            std_final_fidelity: s.std_final_fidelity,
            events_processed,
            link,
            config,
        }
    }

    pub fn first_arrival_ms(&self) -> Option<f64> {
        self.arrival_times.first().copied()
    }

    pub fn interarrival_times(&self) -> Vec<f64> {
        interarrival_times(&self.arrival_times)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_and_rates() {
        assert_eq!(interarrival_times(&[2.0]), vec![2.0]);
        assert_eq!(interarrival_times(&[1.0, 3.0, 7.0]), vec![2.0, 4.0]);
        let s = Summary::from_samples(&[2.0, 4.0], &[0.9, 0.9]);
        assert!((s.rate_hz - 1000.0 / 3.0).abs() < 1e-9);
        assert!((s.std_interarrival_ms - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.std_final_fidelity, 0.0);
    }
}
