use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repeaterlab::bell_algebra::oracle::{brute_force_oracle, Circuit};
use repeaterlab::probe_model;
use repeaterlab::bell_algebra::{apply_gate_noise, connect, purify, swap, BellDiagonalState, BellState, GateNoise};

fn random_state(rng: &mut impl Rng) -> BellDiagonalState {
    let w: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>() + 1e-3);
    BellDiagonalState::from_weights(w).unwrap()
}

fn max_diff(a: &BellDiagonalState, b: &BellDiagonalState) -> f64 {
    a.populations()
        .iter()
        .zip(b.populations())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn purify_matches_dense_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (a, b) = (random_state(&mut rng), random_state(&mut rng));
        let closed = purify(&a, &b, GateNoise::IDEAL).unwrap();
        let dense = brute_force_oracle(&[a, b], Circuit::Purify).unwrap();
        assert!((closed.success_probability - dense.success_probability).abs() < 1e-10);
        assert!(max_diff(&closed.state, &dense.state) < 1e-10, "{closed:?} vs {dense:?}");
        assert!(dense.max_coherence < 1e-10);
    }
}

#[test]
fn swap_matches_dense_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (a, b) = (random_state(&mut rng), random_state(&mut rng));
        let closed = swap(&a, &b, GateNoise::IDEAL);
        let dense = brute_force_oracle(&[a, b], Circuit::Swap).unwrap();
        assert!((dense.success_probability - 1.0).abs() < 1e-10);
        assert!(max_diff(&closed, &dense.state) < 1e-10, "{closed:?} vs {dense:?}");
        assert!(dense.max_coherence < 1e-10);
    }
}

#[test]
fn connect_is_swap_in_the_target_frame() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let (a, b) = (random_state(&mut rng), random_state(&mut rng));
        let dense = brute_force_oracle(&[a, b], Circuit::Swap).unwrap().state;
        let closed = connect(&a, &b, GateNoise::IDEAL);
        assert!(max_diff(&closed, &dense.relabel(BellState::PsiPlus)) < 1e-10);
    }
    let p = BellDiagonalState::PSI_PLUS;
    assert_eq!(connect(&p, &p, GateNoise::IDEAL).fidelity(), 1.0);
}

fn link_state(eta_sq: f64, p_c: f64) -> BellDiagonalState {
    let eta = eta_sq.sqrt();
    let point = probe_model::optimize_distinguishability(p_c, eta).unwrap();
    let params = probe_model::operating_params(&point, probe_model::DEFAULT_THETA, eta, p_c).unwrap();
    probe_model::postselected_state(&params).unwrap()
}

#[test]
fn purification_gain_and_swap_loss_on_link_states() {
    for i in 0..10 {
        let eta_sq = 0.5 + 0.4 * i as f64 / 9.0;
        for k in 0..10 {
            let p_c = 0.2 + 0.8 * k as f64 / 9.0;
            let s = link_state(eta_sq, p_c);
            let f = s.fidelity();
            let out = purify(&s, &s, GateNoise::IDEAL).unwrap().state.fidelity();
            assert!(out > f, "purify at eta^2={eta_sq}, p_c={p_c}: {out} <= {f}");
            let joined = connect(&s, &s, GateNoise::IDEAL).fidelity();
            assert!(joined <= f, "connect at eta^2={eta_sq}, p_c={p_c}");
            assert!(swap(&s, &s, GateNoise::IDEAL).fidelity() <= f);
        }
    }
}

#[test]
fn operating_point_state_through_both_maps() {
    let s = link_state(2.0 / 3.0, 0.5);
    assert!((s.fidelity() - 0.767).abs() < 1e-3);
    let dense = brute_force_oracle(&[s, s], Circuit::Purify).unwrap();
    let closed = purify(&s, &s, GateNoise::IDEAL).unwrap();
    assert!(closed.state.fidelity() > s.fidelity());
    assert!(max_diff(&closed.state, &dense.state) < 1e-12);
    let dense = brute_force_oracle(&[s, s], Circuit::Swap).unwrap();
    let closed = connect(&s, &s, GateNoise::IDEAL);
    assert!(closed.fidelity() < s.fidelity());
    assert!(max_diff(&closed, &dense.state.relabel(BellState::PsiPlus)) < 1e-12);
}

fn state_strategy() -> impl Strategy<Value = BellDiagonalState> {
    prop::array::uniform4(1e-6f64..1.0).prop_map(|w| BellDiagonalState::from_weights(w).unwrap())
}

proptest! {
    #[test]
    fn outputs_stay_normalised(a in state_strategy(), b in state_strategy(), eps in 0.0f64..0.2) {
        let noise = GateNoise::new(eps).unwrap();
        let p = purify(&a, &b, noise).unwrap();
        prop_assert!((p.state.populations().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.success_probability > 0.0 && p.success_probability <= 1.0);
        let s = swap(&a, &b, noise);
        prop_assert!((s.populations().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.populations().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn swap_is_symmetric(a in state_strategy(), b in state_strategy()) {
        let ab = swap(&a, &b, GateNoise::IDEAL);
        let ba = swap(&b, &a, GateNoise::IDEAL);
        prop_assert!(max_diff(&ab, &ba) < 1e-14);
    }

    #[test]
    fn gate_noise_pulls_toward_mixed(a in state_strategy(), eps in 0.0f64..1.0) {
        let noisy = apply_gate_noise(&a, GateNoise::new(eps).unwrap());
        for (x, y) in a.populations().iter().zip(noisy.populations()) {
            prop_assert!((y - 0.25).abs() <= (x - 0.25).abs() + 1e-15);
        }
    }

    #[test]
    fn noise_lowers_target_population(a in state_strategy(), e1 in 0.0f64..0.5, de in 1e-3f64..0.4) {
        prop_assume!(a.fidelity() > 0.26);
        let lo = apply_gate_noise(&a, GateNoise::new(e1).unwrap()).fidelity();
        let hi = apply_gate_noise(&a, GateNoise::new(e1 + de).unwrap()).fidelity();
        prop_assert!(hi < lo);
    }

    #[test]
    fn noise_never_helps_purification(f in 0.6f64..0.99, eps in 0.001f64..0.1) {
        let w = BellDiagonalState::werner(f).unwrap();
        let clean = purify(&w, &w, GateNoise::IDEAL).unwrap().state.fidelity();
        let noisy = purify(&w, &w, GateNoise::new(eps).unwrap()).unwrap().state.fidelity();
        prop_assert!(noisy < clean);
    }
}
