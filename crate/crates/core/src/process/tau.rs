//! Excursion bookkeeping and the τ-sequence of reflection intervals.
//!
//! The horizon-t path is parsed into incursions into the low-momentum region
//! |K| ≤ t^{3/8−ι} and excursions from it (re-entry at 2t^{3/8−ι}).  Along
//! excursions, the times τ_m chain together: each interval ends at the first
//! sign-flip or when |K| leaves [½|K_{τ_m}|, 3/2|K_{τ_m}|]; when an incursion
//! interrupts, the next anchor waits for the next excursion start.

use super::flip::FlipDetector;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// |K| has not yet dropped below the low threshold
    Excursion,
    /// waiting for |K| to climb back above the high threshold
    Incursion,
}

/// Tracks ϖ_j (incursion starts) and ς_j (excursion starts) against the
/// thresholds low = t^{3/8−ι} and high = 2·low.
#[derive(Debug, Clone)]
pub struct ExcursionTracker {
    pub low: f64,
    pub high: f64,
    phase: Phase,
    pub incursion_starts: u64,
    pub excursion_starts: u64,
}

impl ExcursionTracker {
    /// `iota` defaults to 0; the thresholds are computed from the horizon.
    /// ϖ₁ = 0 by convention, so a path starting below the high threshold is
    /// in its first incursion until it climbs to 2t^{3/8−ι}.
    pub fn new(t_horizon: f64, iota: f64, k0_abs: f64) -> Self {
        let low = t_horizon.powf(0.375 - iota);
        let high = 2.0 * low;
        ExcursionTracker {
            low,
            high,
            phase: if k0_abs >= high {
                Phase::Excursion
            } else {
                Phase::Incursion
            },
            incursion_starts: 0,
            excursion_starts: 0,
        }
    }

    /// Feed |K| after an event; reports a phase change.
    fn on_event(&mut self, k_abs: f64) -> Option<Phase> {
        match self.phase {
            Phase::Excursion if k_abs <= self.low => {
                self.phase = Phase::Incursion;
                self.incursion_starts += 1;
                Some(Phase::Incursion)
            }
            Phase::Incursion if k_abs >= self.high => {
                self.phase = Phase::Excursion;
                self.excursion_starts += 1;
                Some(Phase::Excursion)
            }
            _ => None,
        }
    }
}

/// One closed reflection interval (τ_m, Δτ_m) with its anchor momentum.
#[derive(Debug, Clone, Copy)]
pub struct TauInterval {
    pub tau: f64,
    pub k_anchor: f64,
    pub delta: f64,
    /// closed by a sign-flip (as opposed to a band exit)
    pub ended_by_flip: bool,
}

#[inline]
fn outside_band(k: f64, anchor: f64) -> bool {
    let a = k.abs();
    a < 0.5 * anchor.abs() || a > 1.5 * anchor.abs()
}

/// Online τ-sequencer: combines the flip detector, the excursion tracker, and
/// the per-anchor momentum band.
#[derive(Debug, Clone)]
pub struct TauSequencer {
    tracker: ExcursionTracker,
    det: FlipDetector,
    /// current anchor (τ_m, K_{τ_m}), None while waiting for an excursion
    anchor: Option<(f64, f64)>,
    /// an incursion began during the current interval
    interrupted: bool,
    started: bool,
}

impl TauSequencer {
    pub fn new(t_horizon: f64, iota: f64, k0: f64) -> Self {
        let tracker = ExcursionTracker::new(t_horizon, iota, k0.abs());
        let starts_high = k0.abs() >= tracker.high;
        TauSequencer {
            tracker,
            det: FlipDetector::new(k0),
            // a path already above the high threshold has sigma_1 = 0
            anchor: starts_high.then_some((0.0, k0)),
            interrupted: false,
            started: starts_high,
        }
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.tracker.low, self.tracker.high)
    }

    /// Feed one event, pushing any intervals it closes into `out` (a flip
    /// followed immediately by a macroscopic jump can close two).
    pub fn on_event(&mut self, t: f64, k_new: f64, out: &mut Vec<TauInterval>) {
        let flip = self.det.on_event(t, k_new);
        let phase = self.tracker.on_event(k_new.abs());

        // tau_1 = sigma_1: anchoring begins at the first excursion start
        if !self.started {
            if phase == Some(Phase::Excursion) {
                self.started = true;
                self.anchor = Some((t, k_new));
            }
            return;
        }

        let Some((tau, ka)) = self.anchor else {
            if phase == Some(Phase::Excursion) {
                self.anchor = Some((t, k_new));
                self.interrupted = false;
            }
            return;
        };

        // a flip ends the interval at its own (earlier) Poisson time; a band
        // exit ends it at this event
        let mut end: Option<(f64, f64, bool)> = None;
        if let Some(f) = flip {
            if f.time > tau {
                end = Some((f.time, f.k_after, true));
            }
        }
        if end.is_none() && outside_band(k_new, ka) {
            end = Some((t, k_new, false));
        }
        let Some((te, ke, by_flip)) = end else {
            if phase == Some(Phase::Incursion) {
                self.interrupted = true;
            }
            return;
        };

        out.push(TauInterval {
            tau,
            k_anchor: ka,
            delta: te - tau,
            ended_by_flip: by_flip,
        });
        if self.interrupted || phase == Some(Phase::Incursion) {
            self.anchor = None; // wait for the next excursion start
        } else {
            self.anchor = Some((te, ke));
            // when a flip closed the interval retroactively, this event has
            // already happened under the new anchor: re-check its band
            if te < t && outside_band(k_new, ke) {
                out.push(TauInterval {
                    tau: te,
                    k_anchor: ke,
                    delta: t - te,
                    ended_by_flip: false,
                });
                self.anchor = Some((t, k_new));
            }
        }
        self.interrupted = false;
    }
}
