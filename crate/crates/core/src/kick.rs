//! Jump-rate densities j(v) for the momentum kicks, with moments, sampling,
//! and verification of the standing assumptions on the rates:
//!
//! 1. ∫ j(v) e^{a|v|} dv < μ for some a > 0 (exponential tails),
//! 2. sup_θ Σ_n j(θ + n/2) < μ (bounded torus contraction),
//! 3. inf_{|v|≤1} j(v) ≥ 1/μ (no gap at small kicks).
//!
//! The default law is Laplace with rate 𝓡 = 1 and scale b = 1, for which the
//! moments are closed form: σ = 2𝓡b², ς = 24b⁴.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error)]
pub enum KickError {
    #[error("invalid kick-law parameters: {0}")]
    BadParams(String),
    #[error("assumption {clause} violated: {detail}")]
    AssumptionViolated { clause: u8, detail: String },
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
}

/// Serializable spec fragment, e.g. `{"family":"laplace","rate":1.0,"scale":1.0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KickSpec {
    Laplace {
        rate: f64,
        scale: f64,
    },
    GaussianMixture {
        rate: f64,
        /// (weight, std) pairs; weights sum to 1
        components: Vec<(f64, f64)>,
    },
    Tabulated {
        /// symmetric grid of (v ≥ 0, density) knots, linearly interpolated,
        /// mirrored to v < 0, zero beyond the last knot
        knots: Vec<(f64, f64)>,
    },
}

impl Default for KickSpec {
    fn default() -> Self {
        KickSpec::Laplace { rate: 1.0, scale: 1.0 }
    }
}

#[derive(Debug, Clone)]
enum Family {
    Laplace { b: f64 },
    GaussianMixture { components: Vec<(f64, f64)> },
    Tabulated { knots: Vec<(f64, f64)>, cdf: Vec<f64> },
}

/// A validated kick law: density, moments, sampler.
#[derive(Debug, Clone)]
pub struct KickLaw {
    family: Family,
    /// total rate 𝓡 = ∫ j
    pub rate: f64,
    /// second moment σ = ∫ j v²
    pub sigma: f64,
    /// normalized fourth moment ς = ∫ (j/𝓡) v⁴
    pub varsigma: f64,
    /// largest grid-verified a with ∫ j e^{a|v|} finite
    pub exp_moment_a: f64,
    /// the constant μ from the assumption checks
    pub mu: f64,
}

impl KickLaw {
    /// Default law: Laplace(𝓡 = 1, b = 1).
    pub fn default_laplace() -> Self {
        Self::build(&KickSpec::default()).expect("default law always valid")
    }

    pub fn build(spec: &KickSpec) -> Result<Self, KickError> {
        let (family, rate, sigma, varsigma) = match spec {
            KickSpec::Laplace { rate, scale } => {
                if *rate <= 0.0 || *scale <= 0.0 {
                    return Err(KickError::BadParams(format!(
                        "laplace needs rate > 0 and scale > 0, got {rate}, {scale}"
                    )));
                }
                let b = *scale;
                (
                    Family::Laplace { b },
                    *rate,
                    2.0 * rate * b * b,
                    24.0 * b.powi(4),
                )
            }
            KickSpec::GaussianMixture { rate, components } => {
                if *rate <= 0.0 || components.is_empty() {
                    return Err(KickError::BadParams("empty mixture".into()));
                }
                let wsum: f64 = components.iter().map(|c| c.0).sum();
                if (wsum - 1.0).abs() > 1e-9 || components.iter().any(|c| c.0 < 0.0 || c.1 <= 0.0)
                {
                    return Err(KickError::BadParams(
                        "mixture weights must be nonnegative and sum to 1; stds positive".into(),
                    ));
                }
                let m2: f64 = components.iter().map(|&(w, s)| w * s * s).sum();
                let m4: f64 = components.iter().map(|&(w, s)| 3.0 * w * s.powi(4)).sum();
                (
                    Family::GaussianMixture { components: components.clone() },
                    *rate,
                    rate * m2,
                    m4,
                )
            }
            KickSpec::Tabulated { knots } => {
                if knots.len() < 2 || knots[0].0 != 0.0 {
                    return Err(KickError::BadParams(
                        "tabulated law needs knots starting at v = 0".into(),
                    ));
                }
                for w in knots.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(KickError::BadParams("knots must be increasing".into()));
                    }
                }
                if knots.iter().any(|k| k.1 < 0.0) {
                    return Err(KickError::BadParams("negative density".into()));
                }
                let dens = |v: f64| tab_density(knots, v);
                let vmax = knots.last().unwrap().0;
                let r = 2.0 * quad::integrate(dens, 0.0, vmax, 1e-10)?;
                let s = 2.0 * quad::integrate(|v| dens(v) * v * v, 0.0, vmax, 1e-10)?;
                let m4 = 2.0 * quad::integrate(|v| dens(v) * v.powi(4), 0.0, vmax, 1e-10)?;
                // half-cell cumulative table for inverse sampling
                let mut cdf = Vec::with_capacity(knots.len());
                let mut acc = 0.0;
                cdf.push(0.0);
                for w in knots.windows(2) {
                    acc += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
                    cdf.push(acc);
                }
                (
                    Family::Tabulated { knots: knots.clone(), cdf },
                    r,
                    s,
                    m4 / r,
                )
            }
        };
        let mut law = KickLaw {
            family,
            rate,
            sigma,
            varsigma,
            exp_moment_a: 0.0,
            mu: 0.0,
        };
        law.check_assumptions()?;
        Ok(law)
    }

    /// Density j(v); even in v by construction.
    pub fn density(&self, v: f64) -> f64 {
        let v = v.abs();
        match &self.family {
            Family::Laplace { b } => self.rate / (2.0 * b) * (-v / b).exp(),
            Family::GaussianMixture { components } => {
                let norm: f64 = components
                    .iter()
                    .map(|&(w, s)| {
                        w / (s * (2.0 * std::f64::consts::PI).sqrt())
                            * (-0.5 * (v / s).powi(2)).exp()
                    })
                    .sum();
                self.rate * norm
            }
            Family::Tabulated { knots, .. } => tab_density(knots, v),
        }
    }

    /// CDF of the normalized jump density j/𝓡.
    pub fn cdf(&self, v: f64) -> f64 {
        match &self.family {
            Family::Laplace { b } => {
                if v < 0.0 {
                    0.5 * (v / b).exp()
                } else {
                    1.0 - 0.5 * (-v / b).exp()
                }
            }
            Family::GaussianMixture { components } => {
                let phi = |x: f64| 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2));
                components.iter().map(|&(w, s)| w * phi(v / s)).sum()
            }
            Family::Tabulated { knots, cdf } => {
                let half = cdf.last().unwrap();
                let u = v.abs();
                let i = knots.partition_point(|k| k.0 < u).min(knots.len() - 1);
                let (lo, hi) = (knots[i.saturating_sub(1)], knots[i]);
                let frac = if u >= hi.0 {
                    cdf[i]
                } else {
                    let t = (u - lo.0) / (hi.0 - lo.0);
                    cdf[i - 1]
                        + (hi.0 - lo.0) * (lo.1 * t + 0.5 * (hi.1 - lo.1) * t * t)
                };
                if v >= 0.0 {
                    0.5 + 0.5 * frac / half
                } else {
                    0.5 - 0.5 * frac / half
                }
            }
        }
    }

    /// Draw one kick with density j/𝓡, deterministically from the stream.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.family {
            Family::Laplace { b } => {
                // inverse CDF
                let u: f64 = rng.gen();
                let centered = u - 0.5;
                -b * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
            }
            Family::GaussianMixture { components } => {
                let mut u: f64 = rng.gen();
                let mut s_pick = components.last().unwrap().1;
                for &(w, s) in components {
                    if u < w {
                        s_pick = s;
                        break;
                    }
                    u -= w;
                }
                // Box-Muller from two stream draws keeps determinism simple
                let u1: f64 = rng.gen::<f64>().max(1e-300);
                let u2: f64 = rng.gen();
                let z = (-2.0 * u1.ln()).sqrt()
                    * (2.0 * std::f64::consts::PI * u2).cos();
                s_pick * z
            }
            Family::Tabulated { knots, cdf } => {
                let half = *cdf.last().unwrap();
                let u: f64 = rng.gen();
                let sign = if u < 0.5 { -1.0 } else { 1.0 };
                let target = (2.0 * (u - 0.5).abs()) * half;
                let i = cdf.partition_point(|&c| c < target).max(1);
                let (lo, hi) = (knots[i - 1], knots[i]);
                let seg = cdf[i] - cdf[i - 1];
                let t = if seg > 0.0 { (target - cdf[i - 1]) / seg } else { 0.0 };
                sign * (lo.0 + t * (hi.0 - lo.0))
            }
        }
    }

    /// Contracted density ⟨j⟩(θ) = Σ_n j(θ + n/2) on [−¼, ¼).
    pub fn torus_contraction(&self, theta: f64) -> f64 {
        let mut s = 0.0;
        let mut n = 0i64;
        loop {
            let t1 = self.density(theta + n as f64 / 2.0);
            let t2 = if n > 0 { self.density(theta - n as f64 / 2.0) } else { 0.0 };
            s += t1 + t2;
            if n > 4 && t1 + t2 < 1e-14 * s.max(1e-300) {
                break;
            }
            n += 1;
            if n > 100_000 {
                break;
            }
        }
        s
    }

    fn check_assumptions(&mut self) -> Result<(), KickError> {
        // clause 3: no gap on [-1, 1]
        let mut inf_small = f64::INFINITY;
        for i in 0..=400 {
            let v = i as f64 / 400.0;
            inf_small = inf_small.min(self.density(v));
        }
        if inf_small <= 0.0 {
            return Err(KickError::AssumptionViolated {
                clause: 3,
                detail: format!("density vanishes on [-1,1] (min {inf_small:e})"),
            });
        }
        // clause 2: bounded torus contraction
        let mut sup_contract = 0.0f64;
        for i in 0..200 {
            let theta = -0.25 + 0.5 * (i as f64 + 0.5) / 200.0;
            sup_contract = sup_contract.max(self.torus_contraction(theta));
        }
        if !sup_contract.is_finite() {
            return Err(KickError::AssumptionViolated {
                clause: 2,
                detail: "torus contraction diverges".into(),
            });
        }
        // clause 1: exponential moment, scanned over a doubling grid of a
        let v_max = match &self.family {
            Family::Laplace { b } => 60.0 * b,
            Family::GaussianMixture { components } => {
                12.0 * components.iter().map(|c| c.1).fold(0.0, f64::max)
            }
            Family::Tabulated { knots, .. } => knots.last().unwrap().0,
        };
        let mut best_a = 0.0;
        let mut best_val = self.rate;
        let mut a = match &self.family {
            Family::Laplace { b } => 0.5 / b,
            _ => 0.25,
        };
        for _ in 0..8 {
            let val = quad::integrate(|v| self.density(v) * (a * v.abs()).exp(), -v_max, v_max, 1e-8);
            match val {
                Ok(val)
                    if val.is_finite()
                        && self.density(v_max) * (a * v_max).exp() < 1e-10 * val =>
                {
                    best_a = a;
                    best_val = val;
                    a *= 1.5;
                }
                _ => break,
            }
        }
        if best_a == 0.0 {
            return Err(KickError::AssumptionViolated {
                clause: 1,
                detail: "no verifiable exponential moment".into(),
            });
        }
        self.exp_moment_a = best_a;
        self.mu = (best_val.max(sup_contract).max(1.0 / inf_small)) * 1.001;
        Ok(())
    }
}

fn tab_density(knots: &[(f64, f64)], v: f64) -> f64 {
    let v = v.abs();
    if v >= knots.last().unwrap().0 {
        return 0.0;
    }
    let i = knots.partition_point(|k| k.0 <= v);
    let (lo, hi) = (knots[i - 1], knots[i]);
    let t = (v - lo.0) / (hi.0 - lo.0);
    lo.1 + t * (hi.1 - lo.1)
}

fn erf(x: f64) -> f64 {
    // Abramowitz & Stegun 7.1.26, |err| < 1.5e-7; adequate for the mixture CDF
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_closed_form_moments() {
        let law = KickLaw::default_laplace();
        assert_eq!(law.rate, 1.0);
        assert!((law.sigma - 2.0).abs() < 1e-14);
        assert!((law.varsigma - 24.0).abs() < 1e-12);
        assert!(law.exp_moment_a > 0.0 && law.exp_moment_a < 1.0);
    }

    #[test]
    fn quadrature_moments_match_closed_forms() {
        let law = KickLaw::default_laplace();
        let r = quad::integrate(|v| law.density(v), -80.0, 80.0, 1e-10).unwrap();
        let s = quad::integrate(|v| law.density(v) * v * v, -80.0, 80.0, 1e-10).unwrap();
        assert!((r - law.rate).abs() < 1e-8);
        assert!((s - law.sigma).abs() < 1e-8);
    }

    #[test]
    fn density_symmetric() {
        let law = KickLaw::default_laplace();
        for i in 0..100 {
            let v = -5.0 + 10.0 * i as f64 / 100.0;
            assert_eq!(law.density(v), law.density(-v));
        }
    }

    #[test]
    fn tabulated_gap_fails_clause_3() {
        // zero density on [0.5, 0.6]
        let spec = KickSpec::Tabulated {
            knots: vec![(0.0, 0.5), (0.5, 0.0), (0.6, 0.0), (2.0, 0.3), (5.0, 0.0)],
        };
        match KickLaw::build(&spec) {
            Err(KickError::AssumptionViolated { clause: 3, .. }) => {}
            other => panic!("expected clause-3 violation, got {other:?}"),
        }
    }

    #[test]
    fn sampling_moments_and_ks() {
        let law = KickLaw::default_laplace();
        let mut rng = crate::rng::substream(2024, 0);
        let n = 100_000usize;
        let mut xs: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // SE of the mean is sqrt(2/n); of the second moment sqrt((24-4)/n)
        assert!(mean.abs() < 4.0 * (2.0 / n as f64).sqrt(), "mean={mean}");
        let se2 = ((law.varsigma - 4.0) / n as f64).sqrt();
        assert!((m2 - 2.0).abs() < 4.0 * se2, "m2={m2}");
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = crate::stats::ks_statistic(&xs, |v| law.cdf(v));
        assert!(ks < 0.006, "ks={ks}");
    }

    #[test]
    fn torus_contraction_bounded_by_mu() {
        let law = KickLaw::default_laplace();
        for i in 0..100 {
            let theta = -0.25 + 0.5 * i as f64 / 100.0;
            assert!(law.torus_contraction(theta) <= law.mu);
        }
    }

    #[test]
    fn mixture_moments() {
        let spec = KickSpec::GaussianMixture {
            rate: 2.0,
            components: vec![(0.7, 1.0), (0.3, 2.5)],
        };
        let law = KickLaw::build(&spec).unwrap();
        let m2 = 0.7 + 0.3 * 6.25;
        assert!((law.sigma - 2.0 * m2).abs() < 1e-12);
        let cdf_inf = law.cdf(40.0);
        assert!((cdf_inf - 1.0).abs() < 1e-6);
    }
}
