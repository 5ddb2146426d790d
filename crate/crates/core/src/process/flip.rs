//! Sign-flip detection with the one-event lookahead rule.
//!
//! A flip is assigned to a Poisson time t_n when the run of consecutive sign
//! changes ending at t_n has odd length and the next event keeps the sign:
//! S(K_{t_{n+1}}) = S(K_{t_n}).  Even runs are "fake" double flips and are
//! never counted.

use serde::Serialize;

/// A confirmed sign flip: the Poisson time it is assigned to and the momenta
/// on either side of that event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlipEvent {
    pub time: f64,
    pub k_before: f64,
    pub k_after: f64,
}

#[derive(Debug, Clone)]
pub struct FlipDetector {
    last_sign: i8,
    last_k: f64,
    run_len: u32,
    run_end_time: f64,
    run_end_k: f64,
    run_end_k_before: f64,
}

#[inline]
fn sgn(k: f64) -> i8 {
    if k < 0.0 {
        -1
    } else {
        1
    }
}

impl FlipDetector {
    pub fn new(k0: f64) -> Self {
        FlipDetector {
            last_sign: sgn(k0),
            last_k: k0,
            run_len: 0,
            run_end_time: 0.0,
            run_end_k: k0,
            run_end_k_before: k0,
        }
    }

    /// Feed the post-event momentum; returns the flip this event confirms, if
    /// any (its time is the *previous* event, where the odd run ended).
    pub fn on_event(&mut self, t: f64, k_new: f64) -> Option<FlipEvent> {
        let s = sgn(k_new);
        let out = if s != self.last_sign {
            self.run_len += 1;
            self.run_end_time = t;
            self.run_end_k = k_new;
            self.run_end_k_before = self.last_k;
            None
        } else {
            let confirmed = if self.run_len % 2 == 1 {
                Some(FlipEvent {
                    time: self.run_end_time,
                    k_before: self.run_end_k_before,
                    k_after: self.run_end_k,
                })
            } else {
                None
            };
            self.run_len = 0;
            confirmed
        };
        self.last_sign = s;
        self.last_k = k_new;
        out
    }
}

/// Offline pass over a complete event log (post-event momenta with times,
/// preceded by the initial momentum).  Emits the flip times in order.
pub fn detect_sign_flips(k0: f64, events: &[(f64, f64)]) -> Vec<FlipEvent> {
    let mut det = FlipDetector::new(k0);
    let mut out = Vec::new();
    for &(t, k) in events {
        if let Some(f) = det.on_event(t, k) {
            out.push(f);
        }
    }
    out
}

/// Literal re-scan of the flip definition, kept as the reference the online
/// detector is verified against: a flip at event n needs an odd maximal run
/// of sign changes ending at n and a sign-preserving event n+1.  A run that
/// reaches the log start counts (the initial momentum is taken as stable).
pub fn detect_sign_flips_by_rescan(k0: f64, events: &[(f64, f64)]) -> Vec<f64> {
    let mut signs = vec![sgn(k0)];
    signs.extend(events.iter().map(|&(_, k)| sgn(k)));
    let changes: Vec<bool> = signs.windows(2).map(|w| w[0] != w[1]).collect();
    let mut flips = Vec::new();
    for n in 1..changes.len() {
        if changes[n] {
            continue;
        }
        let mut m = 0;
        while n >= 1 + m && changes[n - 1 - m] {
            m += 1;
        }
        if m == 0 || m % 2 == 0 {
            continue;
        }
        flips.push(events[n - 1].0);
    }
    flips
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn log_from_signs(signs: &[i8]) -> (f64, Vec<(f64, f64)>) {
        // K magnitudes irrelevant for detection
        let k0 = signs[0] as f64 * 10.0;
        let events = signs[1..]
            .iter()
            .enumerate()
            .map(|(i, &s)| ((i + 1) as f64, s as f64 * 10.0))
            .collect();
        (k0, events)
    }

    #[test]
    fn single_change_then_stable_is_one_flip() {
        // (+,+,-,-): one flip at the third event (time 2.0)
        let (k0, ev) = log_from_signs(&[1, 1, -1, -1]);
        let flips = detect_sign_flips(k0, &ev);
        assert_eq!(flips.len(), 1);
        assert_eq!(flips[0].time, 2.0);
    }

    #[test]
    fn double_change_is_no_flip() {
        // (+,+,-,+,+): even run of 2 changes, zero flips
        let (k0, ev) = log_from_signs(&[1, 1, -1, 1, 1]);
        assert!(detect_sign_flips(k0, &ev).is_empty());
    }

    #[test]
    fn triple_change_is_one_flip() {
        // (+,-,+,-,-): odd run of 3 ending at event 3, confirmed by event 4
        let (k0, ev) = log_from_signs(&[1, -1, 1, -1, -1]);
        let flips = detect_sign_flips(k0, &ev);
        assert_eq!(flips.len(), 1);
        assert_eq!(flips[0].time, 3.0);
    }

    #[test]
    fn detector_matches_brute_force_on_synthetic_logs() {
        let mut rng = crate::rng::substream(77, 0);
        for case in 0..1000 {
            let len = 3 + (rng.gen::<u64>() % 40) as usize;
            let signs: Vec<i8> = (0..len)
                .map(|_| if rng.gen::<f64>() < 0.45 { -1 } else { 1 })
                .collect();
            let (k0, ev) = log_from_signs(&signs);
            let fast: Vec<f64> = detect_sign_flips(k0, &ev).iter().map(|f| f.time).collect();
            let brute = detect_sign_flips_by_rescan(k0, &ev);
            assert_eq!(fast, brute, "case {case}: signs {signs:?}");
        }
    }
}
