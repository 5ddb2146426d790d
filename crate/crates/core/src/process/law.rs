//! Process variants and the single-event transition.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::flip::FlipDetector;
use super::ProcessError;
use crate::bloch::{
    band_coords, nudge_half_integer, reflection_quantities, sample_lattice_jump, CombParams,
};
use crate::kick::KickLaw;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ProcessLaw {
    Exact,
    IdealizedOneStep,
    IdealizedTwoStep,
    BandModel { vartheta: f64 },
    FreeLevy,
}

impl ProcessLaw {
    pub fn validate(&self) -> Result<(), ProcessError> {
        if let ProcessLaw::BandModel { vartheta } = self {
            if !(*vartheta > 0.0 && *vartheta <= 1.0) {
                return Err(ProcessError::Config(format!(
                    "band-model vartheta must lie in (0, 1], got {vartheta}"
                )));
            }
        }
        Ok(())
    }

    /// Whether the comb dispersion backs this law's energy observable.
    /// The band model and the free walk are comb-free: their energy is k².
    pub fn uses_comb_dispersion(&self) -> bool {
        matches!(
            self,
            ProcessLaw::Exact | ProcessLaw::IdealizedOneStep | ProcessLaw::IdealizedTwoStep
        )
    }

    pub fn energy(&self, k: f64, comb: &CombParams) -> Result<f64, ProcessError> {
        if self.uses_comb_dispersion() {
            Ok(comb.dispersion(k)?)
        } else {
            Ok(k * k)
        }
    }
}

/// One Monte Carlo path: position in time, momentum, the exact Y accumulator,
/// flip-detector state, and event counters.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub t: f64,
    pub k: f64,
    pub y: f64,
    pub flip: FlipDetector,
    pub events: u64,
    pub flips: u64,
}

impl TrajectoryState {
    /// Initialize at momentum k0 (nudged off ½ℤ).  The one-step idealized law
    /// performs its extra reflection −𝐧(K₀) with probability 𝐫₋(K₀) at 0⁺.
    pub fn new<R: Rng>(
        k0: f64,
        law: &ProcessLaw,
        comb: &CombParams,
        rng: &mut R,
    ) -> TrajectoryState {
        let mut k = nudge_half_integer(k0);
        if let ProcessLaw::IdealizedOneStep = law {
            let r = reflection_quantities(comb.alpha(), k);
            if rng.gen::<f64>() < r.r_minus {
                k -= band_coords(k).nhalf as f64;
            }
        }
        TrajectoryState {
            t: 0.0,
            k,
            y: 0.0,
            flip: FlipDetector::new(k),
            events: 0,
            flips: 0,
        }
    }
}

/// What happened in one event, for callers that track flips or records.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub t: f64,
    pub k_new: f64,
    pub v: f64,
    pub lattice: f64,
    /// flip confirmed by this event (at an earlier Poisson time)
    pub flip: Option<super::flip::FlipEvent>,
}

/// Advance one Poisson event: Δt ~ Exp(𝓡), Y += K·Δt, draw v ~ j/𝓡, then the
/// lattice component per law.
pub fn step<R: Rng>(
    state: &mut TrajectoryState,
    law: &ProcessLaw,
    kick: &KickLaw,
    comb: &CombParams,
    rng: &mut R,
) -> Result<StepOutcome, ProcessError> {
    let dt = exp_sample(rng) / kick.rate;
    state.y += state.k * dt;
    state.t += dt;
    let v = kick.sample(rng);
    let k_new = lattice_component(state.k, v, law, comb, rng)?;
    let lattice = k_new - state.k - v;
    state.k = k_new;
    state.events += 1;
    let flip = state.flip.on_event(state.t, k_new);
    if flip.is_some() {
        state.flips += 1;
    }
    Ok(StepOutcome {
        t: state.t,
        k_new,
        v,
        lattice,
        flip,
    })
}

/// The post-jump momentum from k with Lévy component v under `law`.
pub fn lattice_component<R: Rng>(
    k: f64,
    v: f64,
    law: &ProcessLaw,
    comb: &CombParams,
    rng: &mut R,
) -> Result<f64, ProcessError> {
    let kv = k + v;
    Ok(match law {
        ProcessLaw::FreeLevy => kv,
        ProcessLaw::BandModel { vartheta } => {
            let bc = band_coords(kv);
            if bc.nhalf != 0 {
                let w = comb.alpha()
                    * (bc.nhalf.abs() as f64).powf(-2.0 * vartheta)
                    * (2.0f64).powf(2.0 * vartheta - 1.0);
                if bc.theta.abs() <= w && rng.gen::<f64>() < 0.5 {
                    return Ok(-kv);
                }
            }
            kv
        }
        ProcessLaw::IdealizedOneStep => {
            let kv = nudge_half_integer(kv);
            let r = reflection_quantities(comb.alpha(), kv);
            if rng.gen::<f64>() < r.big_r_minus {
                kv - band_coords(kv).nhalf as f64
            } else {
                kv
            }
        }
        ProcessLaw::IdealizedTwoStep => {
            let kk = nudge_half_integer(k);
            let kv = nudge_half_integer(kv);
            let rk = reflection_quantities(comb.alpha(), kk);
            let rkv = reflection_quantities(comb.alpha(), kv);
            let nk = band_coords(kk).nhalf as f64;
            let nkv = band_coords(kv).nhalf as f64;
            // four lattice jumps; coincident values pool their probabilities
            // automatically under cumulative sampling
            let jumps = [
                (-nk, rk.r_minus * rkv.r_plus),
                (-nkv, rk.r_plus * rkv.r_minus),
                (nk - nkv, rk.r_minus * rkv.r_minus),
                (0.0, rk.r_plus * rkv.r_plus),
            ];
            debug_assert!(
                (jumps.iter().map(|j| j.1).sum::<f64>() - 1.0).abs() < 1e-12,
                "two-step lattice probabilities must sum to 1"
            );
            let mut u = rng.gen::<f64>();
            let mut pick = 0.0;
            for &(jump, p) in &jumps {
                if u < p {
                    pick = jump;
                    break;
                }
                u -= p;
            }
            kv + pick
        }
        ProcessLaw::Exact => {
            let kk = nudge_half_integer(k);
            let n = sample_lattice_jump(kk, v, comb, rng)?;
            kk + v + n as f64
        }
    })
}

#[inline]
fn exp_sample<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen::<f64>();
    -(1.0 - u).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_levy_is_running_sum() {
        let comb = CombParams::new(1.0, 10.0).unwrap();
        let law = ProcessLaw::FreeLevy;
        let kick = KickLaw::default_laplace();
        let mut rng = crate::rng::substream(3, 0);
        let mut state = TrajectoryState::new(0.4, &law, &comb, &mut rng);
        let mut levy_sum = state.k;
        for _ in 0..500 {
            let out = step(&mut state, &law, &kick, &comb, &mut rng).unwrap();
            levy_sum += out.v;
            assert_eq!(state.k, levy_sum);
        }
    }

    #[test]
    fn band_model_flip_is_pure_reflection() {
        let comb = CombParams::new(1.0, 10.0).unwrap();
        let law = ProcessLaw::BandModel { vartheta: 0.5 };
        let kick = KickLaw::default_laplace();
        let mut rng = crate::rng::substream(4, 0);
        let mut state = TrajectoryState::new(60.3, &law, &comb, &mut rng);
        for _ in 0..2000 {
            let before = state.k;
            let out = step(&mut state, &law, &kick, &comb, &mut rng).unwrap();
            // |K| evolves exactly like |previous + v| regardless of the flip
            let levy_abs = (before + out.v).abs();
            assert!((state.k.abs() - levy_abs).abs() < 1e-12);
        }
    }

    #[test]
    fn vartheta_out_of_range_rejected() {
        assert!(ProcessLaw::BandModel { vartheta: 0.0 }.validate().is_err());
        assert!(ProcessLaw::BandModel { vartheta: 1.2 }.validate().is_err());
        assert!(ProcessLaw::BandModel { vartheta: 1.0 }.validate().is_ok());
    }

    #[test]
    fn y_accumulates_k_dt_exactly() {
        let comb = CombParams::new(1.0, 10.0).unwrap();
        let law = ProcessLaw::FreeLevy;
        let kick = KickLaw::default_laplace();
        let mut rng = crate::rng::substream(5, 0);
        let mut state = TrajectoryState::new(1.3, &law, &comb, &mut rng);
        let mut manual = 0.0;
        let mut t_prev = 0.0;
        let mut k_prev = state.k;
        for _ in 0..200 {
            step(&mut state, &law, &kick, &comb, &mut rng).unwrap();
            manual += k_prev * (state.t - t_prev);
            t_prev = state.t;
            k_prev = state.k;
            assert!((state.y - manual).abs() <= 1e-12 * manual.abs().max(1.0));
        }
    }
}
