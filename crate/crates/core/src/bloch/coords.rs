//! Band coordinates around the half-spaced lattice and reflection weights.

use serde::Serialize;

/// Position of k relative to the half-spaced reciprocal lattice ½ℤ:
/// k = 𝐧/2 + Θ with Θ ∈ [−¼, ¼), plus the dilated offset β = ½𝐧Θ that
/// parameterizes the local reflection profile.
///
/// Θ and 𝐧 are *not* the quasimomentum and the energy band index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCoords {
    pub theta: f64,
    pub nhalf: i64,
    pub beta: f64,
}

/// Decompose k = 𝐧/2 + Θ, Θ ∈ [−¼, ¼).
pub fn band_coords(k: f64) -> BandCoords {
    let mut theta = k.rem_euclid(0.5);
    if theta >= 0.25 {
        theta -= 0.5;
    }
    let nhalf = (2.0 * (k - theta)).round() as i64;
    // re-derive theta from the integer to keep k = n/2 + theta exact in ulp
    let theta = k - nhalf as f64 / 2.0;
    BandCoords {
        theta,
        nhalf,
        beta: 0.5 * nhalf as f64 * theta,
    }
}

/// Reflection weights at momentum k for comb strength α.
///
/// With c = α/4π and s = √(β² + c²):
/// γ(β) = s − c, 𝐫₋ = (s − |β|)/2s, 𝐫₊ = 1 − 𝐫₋, and 𝐑₋ = 2𝐫₋𝐫₊.
/// 𝐫₋ is the minority weight of the two-wave mixture at offset β from a band
/// center; it is ½ at β = 0 (the 0/0 in the ratio form is removable: γ(β) =
/// O(β²) near 0, so the ratio (|β|+γ)/(|β|−γ) → 1).  Π₋ is kept as a separate
/// profile function for the rate heuristics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReflectionQuantities {
    pub gamma: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub big_r_minus: f64,
    pub beta: f64,
}

impl ReflectionQuantities {
    /// The Lorentzian profile Π₋(x) = (α²/8π²)/(x² + α²/16π²).
    ///
    /// Integrates to α/2 over the line.  Note Π₋(0) = 2, so it is a rate
    /// profile rather than a probability; the implemented reflection
    /// probability is `big_r_minus` = 2𝐫₋𝐫₊ ≤ ½ (they share tails up to a
    /// constant factor).
    pub fn pi_minus_at(alpha: f64, x: f64) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        (alpha * alpha / (8.0 * pi2)) / (x * x + alpha * alpha / (16.0 * pi2))
    }
}

/// Reflection weights 𝐫_±(k), 𝐑₋(k) and γ(β(k)).
pub fn reflection_quantities(alpha: f64, k: f64) -> ReflectionQuantities {
    let beta = band_coords(k).beta;
    reflection_from_beta(alpha, beta)
}

pub(crate) fn reflection_from_beta(alpha: f64, beta: f64) -> ReflectionQuantities {
    let c = alpha / (4.0 * std::f64::consts::PI);
    let s = beta.hypot(c);
    let gamma = s - c;
    let r_minus = 0.5 * (1.0 - beta.abs() / s);
    let r_plus = 1.0 - r_minus;
    ReflectionQuantities {
        gamma,
        r_minus,
        r_plus,
        big_r_minus: 2.0 * r_minus * r_plus,
        beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn coords_examples() {
        let b = band_coords(0.1);
        assert_eq!(b.nhalf, 0);
        assert!((b.theta - 0.1).abs() < 1e-15 && b.beta == 0.0);

        let b = band_coords(7.3);
        assert_eq!(b.nhalf, 15);
        assert!((b.theta + 0.2).abs() < 1e-12);
        assert!((b.beta + 1.5).abs() < 1e-12);

        for n in -7i64..=7 {
            let b = band_coords(n as f64 / 2.0);
            assert_eq!(b.nhalf, n);
            assert_eq!(b.theta, 0.0);
            assert_eq!(b.beta, 0.0);
        }
    }

    #[test]
    fn reconstruction_exact() {
        for i in 0..500 {
            let k = -40.0 + 80.0 * (i as f64 + 0.21) / 500.0;
            let b = band_coords(k);
            assert_eq!(b.nhalf as f64 / 2.0 + b.theta, k, "k={k}");
            // nhalf even <=> k within 1/4 of an integer
            let near_int = (k - k.round()).abs() < 0.25;
            assert_eq!(b.nhalf % 2 == 0, near_int, "k={k}");
        }
    }

    #[test]
    fn fifty_fifty_at_band_center() {
        let r = reflection_from_beta(1.0, 0.0);
        assert!((r.r_minus - 0.5).abs() < 1e-15);
        assert!((r.r_plus - 0.5).abs() < 1e-15);
        assert!((r.big_r_minus - 0.5).abs() < 1e-15);
        assert_eq!(r.gamma, 0.0);
    }

    #[test]
    fn huffington_identity_and_limits() {
        let mut prev = 0.5;
        for i in 1..200 {
            let beta = 0.05 * i as f64;
            let r = reflection_from_beta(1.0, beta);
            assert!((r.big_r_minus - 2.0 * r.r_minus * r.r_plus).abs() < 1e-15);
            assert!(r.r_minus >= 0.0 && r.r_minus <= 0.5);
            assert!((r.r_plus + r.r_minus - 1.0).abs() < 1e-15);
            // monotone decay of both r_minus and big_r_minus in |beta|
            assert!(r.big_r_minus < prev);
            prev = r.big_r_minus;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn ratio_form_matches_closed_form() {
        // r- = 1/(1 + |(|b|+g)/(|b|-g)|^2) for b != 0
        for &beta in &[0.01, 0.3, 2.0, 40.0] {
            let r = reflection_from_beta(1.0, beta);
            let u = (beta + r.gamma) / (beta - r.gamma);
            let direct = 1.0 / (1.0 + u * u);
            assert!((r.r_minus - direct).abs() < 1e-13, "beta={beta}");
        }
    }

    #[test]
    fn pi_minus_integral_is_half_alpha() {
        // closed form: integral of (a^2/8pi^2)/(x^2 + a^2/16pi^2) = a/2
        let alpha = 1.0;
        let v = quad::integrate(
            |x| ReflectionQuantities::pi_minus_at(alpha, x),
            -3000.0,
            3000.0,
            1e-9,
        )
        .unwrap();
        // remaining tail of the Lorentzian beyond +-3000
        let c = alpha / (4.0 * std::f64::consts::PI);
        let tail = 2.0 * (alpha * alpha / (8.0 * std::f64::consts::PI.powi(2))) / c
            * (std::f64::consts::FRAC_PI_2 - (3000.0 / c).atan());
        assert!((v + tail - alpha / 2.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn r_minus_invariant_under_own_band_reflection() {
        // r-(k) = r-(k - n(k))
        for &k in &[17.26, 33.4999, 51.13, 80.62] {
            let n = band_coords(k).nhalf;
            let a = reflection_quantities(1.0, k).r_minus;
            let b = reflection_quantities(1.0, k - n as f64).r_minus;
            assert!((a - b).abs() < 1e-12, "k={k}");
        }
    }
}
