//! Occupation statistics of the low-energy region.

/// Fraction of [0, t_end] the piecewise-constant path spends with
/// √E(K_r) ≤ ε·t_end^{ρ1}.  `events` holds (time, post-event momentum) pairs;
/// `energy` maps momentum to E(k) for the law at hand.
pub fn occupation_stats(
    k0: f64,
    events: &[(f64, f64)],
    t_end: f64,
    epsilon: f64,
    rho1: f64,
    energy: impl Fn(f64) -> f64,
) -> f64 {
    let threshold = epsilon * t_end.powf(rho1);
    let mut below = 0.0;
    let mut t_prev = 0.0;
    let mut k_prev = k0;
    for &(t, k) in events {
        let seg_end = t.min(t_end);
        if seg_end > t_prev && energy(k_prev).sqrt() <= threshold {
            below += seg_end - t_prev;
        }
        if t >= t_end {
            return below / t_end;
        }
        t_prev = t;
        k_prev = k;
    }
    if t_end > t_prev && energy(k_prev).sqrt() <= threshold {
        below += t_end - t_prev;
    }
    below / t_end
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_bounds_and_large_threshold() {
        let events = vec![(1.0, 3.0), (2.5, -1.0), (4.0, 8.0)];
        let f = occupation_stats(0.5, &events, 5.0, 100.0, 0.5, |k| k * k);
        assert_eq!(f, 1.0);
        let f0 = occupation_stats(0.5, &events, 5.0, 1e-9, 0.5, |k| k * k);
        assert_eq!(f0, 0.0);
    }

    #[test]
    fn piecewise_exact() {
        // |K|: 2 on [0,1), 0.5 on [1,3), 4 on [3,5); threshold 1 -> below on [1,3)
        let events = vec![(1.0, 0.5), (3.0, 4.0)];
        let f = occupation_stats(2.0, &events, 5.0, 1.0, 0.0, |k| k * k);
        assert!((f - 0.4).abs() < 1e-15);
    }
}
