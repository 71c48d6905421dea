use repeaterlab::bell_algebra::BellDiagonalState;
use repeaterlab::repeater_sim::{
    self, replay, sweep_epsilon, ChainConfig, SchedulePreset, SimResult, Simulation,
};
use repeaterlab::Error;

fn desk() -> ChainConfig {
    ChainConfig::new(160.0, 10.0).unwrap().with_seed(17)
}

/// Steps `config` to completion, auditing after every event.
fn run_audited(config: ChainConfig) -> SimResult {
    let segment = config.segment_length_km;
    let segments = config.segments();
    let mut sim = Simulation::new(config).unwrap();
    while sim.step().unwrap() {
        sim.audit().unwrap();
        for pair in sim.pairs() {
            assert_eq!(pair.right_station - pair.left_station, 1 << pair.nesting_level);
            assert_eq!(pair.left_station % (1 << pair.nesting_level), 0);
            assert!(pair.right_station <= segments);
            let span_km = (pair.right_station - pair.left_station) as f64 * segment;
            assert_eq!(span_km, segment * f64::from(1u32 << pair.nesting_level));
        }
    }
    sim.audit().unwrap();
    sim.into_result()
}

fn assert_sane(result: &SimResult) {
    let c = &result.config;
    assert_eq!(result.arrival_times.len(), c.target_pairs);
    assert!(result.arrival_times.windows(2).all(|w| w[1] > w[0]));
    let floor = c.total_length_km / c.light_speed_km_per_ms;
    assert!(result.first_arrival_ms().unwrap() >= floor);
    assert!(result.rate_hz > 0.0);
}

#[test]
fn runs_are_reproducible() {
    let a = repeater_sim::run(desk()).unwrap();
    let b = repeater_sim::run(desk()).unwrap();
    assert_eq!(a, b);
    let c = repeater_sim::run(desk().with_seed(18)).unwrap();
    assert_ne!(a.arrival_times, c.arrival_times);
}

#[test]
fn qubits_are_conserved_and_spans_double() {
    for (total, eps) in [(160.0, 0.0), (160.0, 0.01), (80.0, 0.002), (10.0, 0.0)] {
        let config = ChainConfig::new(total, 10.0).unwrap().with_epsilon(eps).with_seed(3);
        assert_sane(&run_audited(config));
    }
    let mut roomy = ChainConfig::new(80.0, 10.0).unwrap().with_seed(4);
    roomy.qubits_per_station = 14;
    assert_sane(&run_audited(roomy.validated().unwrap()));
}

#[test]
fn deterministic_two_segment_chain_has_exact_latency() {
    let mut config = ChainConfig::new(20.0, 10.0).unwrap().with_schedule(vec![0, 0]).with_seed(1);
    config.probe.success_probability_override = Some(1.0);
    config.probe.link_state_override = Some(BellDiagonalState::PSI_PLUS);
    let result = repeater_sim::run(config).unwrap();
    assert!(result.fidelities.iter().all(|&f| f == 1.0));
    // Link round trip 2ℓ/c, then the swap notice travels half the new span.
    let critical_path = 2.0 * 10.0 / 200.0 + 20.0 / (2.0 * 200.0);
    assert!((result.arrival_times[0] - critical_path).abs() < 1e-12, "{:?}", result.arrival_times);
    assert_sane(&result);
}

#[test]
fn delivered_states_replay_from_lineage() {
    for eps in [0.0, 0.003] {
        let config = desk().with_epsilon(eps);
        let noise = config.noise.clone();
        let mut sim = Simulation::new(config).unwrap().with_lineage();
        while sim.step().unwrap() {}
        let delivered = sim.delivered_pairs();
        assert_eq!(delivered.len(), 9);
        for pair in delivered.iter().take(3) {
            let replayed = replay(&pair.lineage, &noise).unwrap();
            for (a, b) in replayed.populations().iter().zip(pair.state.populations()) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(pair.lineage.links() >= 16);
        }
    }
}

#[test]
fn more_purification_approaches_unit_fidelity() {
    let schedules = [
        vec![1, 0, 0, 0, 0],
        vec![2, 1, 0, 0, 0],
        vec![3, 2, 1, 0, 0],
        vec![3, 2, 2, 1, 0],
    ];
    let fidelities: Vec<f64> = schedules
        .iter()
        .map(|s| repeater_sim::run(desk().with_schedule(s.clone())).unwrap().mean_final_fidelity)
        .collect();
    assert!(fidelities.windows(2).all(|w| w[1] > w[0]), "{fidelities:?}");
    assert!(*fidelities.last().unwrap() > 0.99);
}

#[test]
fn deeper_schedule_trades_rate_for_fidelity() {
    let mut config = desk();
    config.target_pairs = 20;
    let balanced = repeater_sim::run(config.clone().with_preset(SchedulePreset::Balanced)).unwrap();
    let deep = repeater_sim::run(config.with_preset(SchedulePreset::Deep)).unwrap();
    assert!(deep.mean_final_fidelity > balanced.mean_final_fidelity);
    assert!(deep.rate_hz < balanced.rate_hz);
}

#[test]
fn gate_noise_lowers_fidelity() {
    let points = sweep_epsilon(&desk(), &[0.0, 0.005, 0.01], 1).unwrap();
    let f: Vec<f64> = points.iter().map(|p| p.mean_final_fidelity).collect();
    assert!(f[0] > f[1] && f[1] > f[2], "{f:?}");
}

#[test]
fn sweep_matches_individual_runs() {
    let base = desk().with_epsilon(0.002);
    let points = sweep_epsilon(&base, &[0.002], 1).unwrap();
    assert_eq!(points[0].runs[0], repeater_sim::run(base.clone()).unwrap());
    assert_eq!(points[0].rate_hz, points[0].runs[0].rate_hz);

    let eps = [0.004, 0.0, 0.002];
    let points = sweep_epsilon(&base, &eps, 2).unwrap();
    for (k, point) in points.iter().enumerate() {
        assert_eq!(point.epsilon, eps[k]);
        assert_eq!(point.seed, base.rng_seed + 2 * k as u64);
        assert_eq!(point.runs.len(), 2);
        assert_eq!(point.runs[1].seed, point.seed + 1);
        let alone = repeater_sim::run(base.clone().with_epsilon(eps[k]).with_seed(point.seed + 1)).unwrap();
        assert_eq!(point.runs[1], alone);
    }
    assert!(sweep_epsilon(&base, &[], 1).unwrap().is_empty());
    assert!(sweep_epsilon(&base, &[0.0], 0).is_err());
}

#[test]
fn starved_stations_report_deadlock() {
    let mut config = ChainConfig::new(20.0, 10.0).unwrap().with_schedule(vec![1, 0]);
    config.qubits_per_station = 2;
    let err = repeater_sim::run(config.validated().unwrap()).unwrap_err();
    match err {
        Error::Deadlock { delivered, target, diagnostic, .. } => {
            assert_eq!((delivered, target), (0, 9));
            assert!(diagnostic.contains("L0"), "{diagnostic}");
        }
        other => panic!("expected deadlock, got {other:?}"),
    }
}

#[test]
fn budget_needs_power_of_two_ratio() {
    assert_eq!(repeater_sim::qubit_budget(1280.0, 10.0).unwrap(), 16);
    assert!(matches!(repeater_sim::qubit_budget(120.0, 10.0), Err(Error::NotPowerOfTwo { .. })));
    assert!(ChainConfig::new(120.0, 10.0).is_err());
}
