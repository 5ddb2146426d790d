//! Reflection waiting-time trials.
//!
//! From a high starting momentum k0, conditioned not to change sign at the
//! first Poisson time (rejection of the first jump only), run until the first
//! sign-flip or until |K| leaves [|k0|/2, 3|k0|/2].  The normalized waiting
//! time τ·ν_eff/|k0| is asymptotically a unit exponential.

use rand::Rng;
use serde::Serialize;

use super::flip::FlipDetector;
use super::law::{lattice_component, ProcessLaw, TrajectoryState};
use super::ProcessError;
use crate::bloch::CombParams;
use crate::kick::KickLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitReason {
    SignFlip,
    BandExit,
    /// the event cap was reached before either condition fired
    Censored,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReflectionOutcome {
    pub tau: f64,
    pub k_tau: f64,
    pub reason: ExitReason,
}

pub fn reflection_trial<R: Rng>(
    k0: f64,
    law: &ProcessLaw,
    kick: &KickLaw,
    comb: &CombParams,
    rng: &mut R,
    max_events: u64,
) -> Result<ReflectionOutcome, ProcessError> {
    assert!(k0.abs() >= 10.0, "reflection trials need |k0| >= 10");
    let mut state = TrajectoryState::new(k0, law, comb, rng);
    let lo = 0.5 * k0.abs();
    let hi = 1.5 * k0.abs();
    let sign0 = state.k.signum();
    let mut det = FlipDetector::new(state.k);

    // first jump by rejection: resample until the sign is preserved
    loop {
        let dt = -(1.0 - rng.gen::<f64>()).ln() / kick.rate;
        let v = kick.sample(rng);
        let k1 = lattice_component(state.k, v, law, comb, rng)?;
        if k1.signum() == sign0 {
            state.t += dt;
            state.k = k1;
            break;
        }
    }
    // the first accepted event preserves the sign by construction
    det.on_event(state.t, state.k);
    if state.k.abs() < lo || state.k.abs() > hi {
        return Ok(ReflectionOutcome {
            tau: state.t,
            k_tau: state.k,
            reason: ExitReason::BandExit,
        });
    }

    for _ in 0..max_events {
        let dt = -(1.0 - rng.gen::<f64>()).ln() / kick.rate;
        let v = kick.sample(rng);
        let k_new = lattice_component(state.k, v, law, comb, rng)?;
        state.t += dt;
        state.k = k_new;
        if let Some(f) = det.on_event(state.t, k_new) {
            return Ok(ReflectionOutcome {
                tau: f.time,
                k_tau: f.k_after,
                reason: ExitReason::SignFlip,
            });
        }
        if k_new.abs() < lo || k_new.abs() > hi {
            return Ok(ReflectionOutcome {
                tau: state.t,
                k_tau: k_new,
                reason: ExitReason::BandExit,
            });
        }
    }
    Ok(ReflectionOutcome {
        tau: state.t,
        k_tau: state.k,
        reason: ExitReason::Censored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_model_waiting_time_near_inverse_nu() {
        // nu = R*alpha for the band model at vartheta = 1/2 by construction
        let comb = CombParams::new(1.0, 20.0).unwrap();
        let kick = KickLaw::default_laplace();
        let law = ProcessLaw::BandModel { vartheta: 0.5 };
        let k0 = 120.3;
        let n = 1200;
        let mut sum = 0.0;
        let mut count = 0;
        for i in 0..n {
            let mut rng = crate::rng::substream(314, i);
            let out = reflection_trial(k0, &law, &kick, &comb, &mut rng, 3_000_000).unwrap();
            assert!(out.reason != ExitReason::Censored);
            sum += out.tau;
            count += 1;
        }
        let mean = sum / count as f64 / k0;
        // nu = 1; 3 SE of an exponential mean with n=1200 is ~0.087
        assert!((mean - 1.0).abs() < 0.12, "mean tau nu/|k0| = {mean}");
    }

    #[test]
    fn free_levy_never_flips_small_horizon() {
        let comb = CombParams::new(1.0, 20.0).unwrap();
        let kick = KickLaw::default_laplace();
        let mut rng = crate::rng::substream(1, 0);
        let out =
            reflection_trial(50.3, &ProcessLaw::FreeLevy, &kick, &comb, &mut rng, 50_000).unwrap();
        // the free walk exits the band long before any sign change at |k0|=50
        assert_eq!(out.reason, ExitReason::BandExit);
    }
}
