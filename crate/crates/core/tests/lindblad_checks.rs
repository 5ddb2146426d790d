//! Quantum-trajectory checks against the operator identities.

use bragg_core::bloch::{nudge_half_integer, CombParams};
use bragg_core::kick::KickLaw;
use bragg_core::lindblad::{
    diagonal_histogram, draw_kicks, evolve_pure_state, BranchPolicy, PureState,
};
use bragg_core::rng::substream_tagged;
use bragg_core::stats::mean_and_se;

fn comb() -> CombParams {
    CombParams::new(1.0, 60.0).unwrap()
}

/// One kick of ±v raises the energy by exactly v² on average over the sign:
/// e^{∓ivX} H e^{±ivX} = (P ± v)² + V.
#[test]
fn kick_energy_increment_identity() {
    let comb = comb();
    let policy = BranchPolicy::default();
    let k0 = 30.3;
    let e0 = comb.dispersion(nudge_half_integer(k0)).unwrap();
    for v in [0.4, 1.1, 2.3] {
        let mut acc = 0.0;
        for s in [v, -v] {
            let state = evolve_pure_state(
                PureState::point(k0),
                0.0,
                &[(0.0, s)],
                0.1,
                &comb,
                &policy,
            )
            .unwrap();
            acc += state.mean_energy(&comb).unwrap();
        }
        let delta = 0.5 * acc - e0;
        assert!(
            (delta - v * v).abs() < 1e-4,
            "v={v}: mean energy increment {delta} vs v^2 = {}",
            v * v
        );
    }
}

/// Ensemble mean energy grows as σt (quantum side of the drift identity).
#[test]
fn quantum_energy_drift() {
    let comb = comb();
    let kick = KickLaw::default_laplace();
    let k0 = 25.3;
    let t = 3.0;
    let n = 600;
    let e0 = comb.dispersion(nudge_half_integer(k0)).unwrap();
    let energies: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = substream_tagged(5150, 7, i);
            let kicks = draw_kicks(t, &kick, &mut rng);
            let state = evolve_pure_state(
                PureState::point(k0),
                t,
                &kicks,
                0.1,
                &comb,
                &BranchPolicy::default(),
            )
            .unwrap();
            state.mean_energy(&comb).unwrap()
        })
        .collect();
    let (m, se) = mean_and_se(&energies);
    assert!(
        (m - e0 - kick.sigma * t).abs() <= 3.0 * se,
        "mean E = {m:.3}, expected {:.3} (se {se:.3})",
        e0 + kick.sigma * t
    );
}

/// Ensemble mean of √E is nondecreasing in t (quantum submartingale).
#[test]
fn quantum_sqrt_energy_nondecreasing() {
    let comb = comb();
    let kick = KickLaw::default_laplace();
    let k0 = 25.3;
    let n = 400;
    let mut prev = 0.0;
    let mut prev_se = 0.0;
    for t in [1.0, 2.0, 4.0] {
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = substream_tagged(5151, 7, i);
                let kicks = draw_kicks(t, &kick, &mut rng);
                let state = evolve_pure_state(
                    PureState::point(k0),
                    t,
                    &kicks,
                    0.1,
                    &comb,
                    &BranchPolicy::default(),
                )
                .unwrap();
                state.mean_energy(&comb).unwrap().sqrt()
            })
            .collect();
        let (m, se) = mean_and_se(&vals);
        assert!(
            m >= prev - 2.0 * (se + prev_se),
            "mean sqrt(E) decreased: {prev:.4} -> {m:.4} at t={t}"
        );
        prev = m;
        prev_se = se;
    }
}

/// Histogram mass accounts for the truncation deficit.
#[test]
fn diagonal_mass_conservation() {
    let comb = comb();
    let kick = KickLaw::default_laplace();
    let states: Vec<PureState> = (0..50)
        .map(|i| {
            let mut rng = substream_tagged(5152, 7, i);
            let kicks = draw_kicks(4.0, &kick, &mut rng);
            evolve_pure_state(
                PureState::point(20.3),
                4.0,
                &kicks,
                0.1,
                &comb,
                &BranchPolicy::default(),
            )
            .unwrap()
        })
        .collect();
    let mean_deficit: f64 =
        states.iter().map(|s| s.norm_deficit).sum::<f64>() / states.len() as f64;
    let h = diagonal_histogram(&states, -45.0, 45.0, 0.05);
    assert!(
        (h.total() - (1.0 - mean_deficit)).abs() < 1e-9,
        "total {} vs 1 - deficit {}",
        h.total(),
        1.0 - mean_deficit
    );
}
