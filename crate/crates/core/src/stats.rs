//! Statistical verification kit: goodness-of-fit statistics, scaling-exponent
//! regression, analytic Brownian targets, the quadratic-variation comparison,
//! and the comb-free Gaussian check.

use serde::Serialize;
use thiserror::Error;

use crate::kick::KickLaw;
use crate::process::EnsembleSummary;
use crate::quad;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("insufficient flips: no τ-intervals recorded")]
    InsufficientFlips,
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
}

/// One-sample Kolmogorov-Smirnov statistic: sup |F̂_n − F| for a sorted sample.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic on sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pearson χ² statistic against expected probabilities; bins with expected
/// count below `min_expected` are pooled into their left neighbor.
pub fn chi_square_statistic(observed: &[u64], probs: &[f64], min_expected: f64) -> (f64, usize) {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut df = 0usize;
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    for (&o, &p) in observed.iter().zip(probs) {
        pool_obs += o as f64;
        pool_exp += p * n as f64;
        if pool_exp >= min_expected {
            stat += (pool_obs - pool_exp).powi(2) / pool_exp;
            df += 1;
            pool_obs = 0.0;
            pool_exp = 0.0;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp.max(1e-12);
        df += 1;
    }
    (stat, df.saturating_sub(1))
}

/// Upper-tail χ² quantile by the Wilson-Hilferty cube approximation
/// (few-per-mille accuracy for df ≥ 10; df = 63 at 99% gives 92.03 vs 92.01).
pub fn chi_square_quantile_99(df: usize) -> f64 {
    let v = df as f64;
    let z = 2.3263478740408408; // Φ⁻¹(0.99)
    v * (1.0 - 2.0 / (9.0 * v) + z * (2.0 / (9.0 * v)).sqrt()).powi(3)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub exponent_se: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Weighted least squares of log Var against log t.  `variance_se[i]` is the
/// standard error of `variances[i]` (jackknife over trajectories upstream).
pub fn scaling_exponent(
    horizons: &[f64],
    variances: &[f64],
    variance_se: &[f64],
) -> Result<ScalingFit, StatsError> {
    if horizons.len() < 4 {
        return Err(StatsError::DegenerateFit(
            "need at least 4 horizons".into(),
        ));
    }
    if horizons.len() != variances.len() || horizons.len() != variance_se.len() {
        return Err(StatsError::DegenerateFit("length mismatch".into()));
    }
    let span = horizons.last().unwrap() / horizons.first().unwrap();
    if span < 100.0 {
        return Err(StatsError::DegenerateFit(format!(
            "horizons must span two decades, ratio only {span:.1}"
        )));
    }
    let xs: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    // se of ln(V) = se(V)/V
    let ws: Vec<f64> = variances
        .iter()
        .zip(variance_se)
        .map(|(v, se)| {
            let s = (se / v).max(1e-8);
            1.0 / (s * s)
        })
        .collect();
    let wsum: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - xbar).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(StatsError::DegenerateFit("zero x-variance".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = ys.iter().zip(&ws).map(|(y, w)| w * (y - ybar).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (y - (intercept + slope * x)).powi(2))
        .sum();
    Ok(ScalingFit {
        exponent: slope,
        exponent_se: (1.0 / sxx).sqrt(),
        intercept,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
    })
}

/// Sample variance with a jackknife standard error over `blocks` trajectory
/// blocks.
pub fn variance_with_jackknife(xs: &[f64], blocks: usize) -> (f64, f64) {
    let n = xs.len();
    let var = variance(xs);
    let b = blocks.clamp(2, n);
    let mut pseudo = Vec::with_capacity(b);
    let chunk = n.div_ceil(b);
    for i in 0..b {
        let lo = i * chunk;
        let hi = ((i + 1) * chunk).min(n);
        if lo >= hi {
            continue;
        }
        let mut rest: Vec<f64> = Vec::with_capacity(n - (hi - lo));
        rest.extend_from_slice(&xs[..lo]);
        rest.extend_from_slice(&xs[hi..]);
        pseudo.push(variance(&rest));
    }
    let m = pseudo.len() as f64;
    let mean_p = pseudo.iter().sum::<f64>() / m;
    let se = ((m - 1.0) / m * pseudo.iter().map(|p| (p - mean_p).powi(2)).sum::<f64>()).sqrt();
    (var, se)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let se = (variance(xs) / xs.len() as f64).sqrt();
    (m, se)
}

/// Analytic constants of the Brownian limit law.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BrownianTargets {
    /// E|Z| = √(2/π)
    pub e_abs_z: f64,
    /// E|Z|³ = 2√(2/π)
    pub e_abs_z3: f64,
    /// Var of ∫₀¹ dB′_r |B_r|^{3/2} = ∫₀¹ E|B_r|³ dr = (2/5)·E|Z|³
    pub var_target: f64,
}

pub fn brownian_targets() -> BrownianTargets {
    let e_abs_z = (2.0 / std::f64::consts::PI).sqrt();
    let e_abs_z3 = 2.0 * e_abs_z;
    BrownianTargets {
        e_abs_z,
        e_abs_z3,
        var_target: 0.4 * e_abs_z3,
    }
}

impl BrownianTargets {
    /// Monte Carlo cross-check of the Gaussian absolute moments.
    pub fn verify_by_mc(&self, seed: u64, n: usize) -> (f64, f64) {
        use rand::Rng;
        let mut rng = crate::rng::substream(seed, 0);
        let mut s1 = 0.0;
        let mut s3 = 0.0;
        for _ in 0..n {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            let a = z.abs();
            s1 += a;
            s3 += a * a * a;
        }
        (s1 / n as f64, s3 / n as f64)
    }
}

/// Quadratic-variation comparison: ensemble mean of
/// |t^{−5/2} Σ_m K²_{τ_m}(Δτ_m − |K_{τ_m}|/ν)²  −  ν⁻¹ t^{−5/2} ∫₀ᵗ E^{3/2} dr|,
/// plus the two term means for diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QvComparison {
    pub mean_abs_difference: f64,
    pub mean_bracket: f64,
    pub mean_limit_term: f64,
    pub n_intervals: u64,
}

pub fn quadratic_variation_compare(
    summary: &EnsembleSummary,
    nu: f64,
) -> Result<QvComparison, StatsError> {
    let qv = summary.qv.as_ref().ok_or(StatsError::InsufficientFlips)?;
    let total_terms: u64 = qv.iter().map(|q| q.n_terms).sum();
    let flip_terms: u64 = qv.iter().map(|q| q.n_flip_terms).sum();
    if total_terms == 0 || flip_terms == 0 {
        return Err(StatsError::InsufficientFlips);
    }
    let t = summary.t_horizon;
    let scale = t.powf(-2.5);
    let mut diff = 0.0;
    let mut mb = 0.0;
    let mut ml = 0.0;
    for q in qv {
        let bracket = scale * q.bracket(nu);
        let limit = scale / nu * q.e32_integral;
        diff += (bracket - limit).abs();
        mb += bracket;
        ml += limit;
    }
    let n = qv.len() as f64;
    Ok(QvComparison {
        mean_abs_difference: diff / n,
        mean_bracket: mb / n,
        mean_limit_term: ml / n,
        n_intervals: total_terms,
    })
}

/// Characteristic function of the kick law: φ(q) = ∫ j(v) e^{ivq} dv (real by
/// symmetry; Laplace has the closed form 𝓡/(1+b²q²), used via quadrature here
/// to stay family-agnostic).
pub fn kick_characteristic(law: &KickLaw, q: f64) -> Result<f64, StatsError> {
    let vmax = crate::rates::v_cutoff(law) + 20.0;
    Ok(quad::integrate(
        |v| law.density(v) * (v * q).cos(),
        -vmax,
        vmax,
        1e-10,
    )?)
}

/// Comb-free case: max over `v_grid` of
/// |exp(∫₀ᵗ(φ(t^{−3/2}(2/λ)(t−r)v) − φ(0))dr) − exp(−(2σ/3λ²)v²)|.
pub fn free_gaussian_check(
    lambda: f64,
    t: f64,
    v_grid: &[f64],
    law: &KickLaw,
) -> Result<f64, StatsError> {
    let mut worst = 0.0f64;
    for &v in v_grid {
        let c = t.powf(-1.5) * (2.0 / lambda) * v;
        let exponent = quad::integrate(
            |r| match kick_characteristic(law, c * (t - r)) {
                Ok(phi) => phi - law.rate,
                Err(_) => f64::NAN,
            },
            0.0,
            t,
            1e-9 * t.max(1.0),
        )?;
        let lhs = exponent.exp();
        let rhs = (-(2.0 * law.sigma) / (3.0 * lambda * lambda) * v * v).exp();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn ks_against_own_distribution() {
        // uniform sample vs uniform cdf at n = 1e5: below the 99% quantile
        let mut rng = crate::rng::substream(8, 0);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < 1.63 / (n as f64).sqrt(), "d={d}");
    }

    #[test]
    fn ks_constant_sample() {
        let xs = vec![0.5; 100];
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d >= 0.5);
    }

    #[test]
    fn ks_separates_alternatives() {
        // Exp(1) sample vs Exp(1) passes, vs Exp(2) fails, n = 1e4
        let mut rng = crate::rng::substream(9, 0);
        let n = 10_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d1 = ks_statistic(&xs, |x| 1.0 - (-x).exp());
        let d2 = ks_statistic(&xs, |x| 1.0 - (-2.0 * x).exp());
        assert!(d1 < 1.63 / (n as f64).sqrt());
        assert!(d2 > 5.0 * 1.63 / (n as f64).sqrt());
    }

    #[test]
    fn chi_square_quantile_reference() {
        // exact 99% quantile at df=63 is 92.010
        let q = chi_square_quantile_99(63);
        assert!((q - 92.01).abs() < 0.2, "q={q}");
    }

    #[test]
    fn scaling_fit_recovers_power_law() {
        let horizons = [1e3f64, 3e3, 1e4, 3e4, 1e5];
        let variances: Vec<f64> = horizons.iter().map(|t| 0.7 * t.powf(2.5)).collect();
        let se: Vec<f64> = variances.iter().map(|v| 0.03 * v).collect();
        let fit = scaling_exponent(&horizons, &variances, &se).unwrap();
        assert!((fit.exponent - 2.5).abs() < 1e-9);
        assert!(fit.r_squared > 0.999999);
    }

    #[test]
    fn scaling_fit_rejects_narrow_span() {
        let horizons = [1e3, 2e3, 3e3, 4e3];
        let v = [1.0, 2.0, 3.0, 4.0];
        let se = [0.1; 4];
        assert!(matches!(
            scaling_exponent(&horizons, &v, &se),
            Err(StatsError::DegenerateFit(_))
        ));
    }

    #[test]
    fn brownian_targets_closed_forms_and_mc() {
        let t = brownian_targets();
        assert!((t.e_abs_z - 0.7978845608028654).abs() < 1e-15);
        assert!((t.e_abs_z3 - 1.5957691216057308).abs() < 1e-15);
        assert!((t.var_target - 0.6383076486422923).abs() < 1e-15);
        let (m1, m3) = t.verify_by_mc(123, 2_000_000);
        assert!((m1 - t.e_abs_z).abs() < 4.0 * 0.6 / 1414.0, "m1={m1}");
        assert!((m3 - t.e_abs_z3).abs() < 4.0 * 3.0 / 1414.0, "m3={m3}");
    }

    #[test]
    fn brownian_variance_by_path_simulation() {
        // Ito isometry route: Var(∫ dB' |B|^{3/2}) = ∫ E|B_r|^3 dr over [0,1]
        use rand::Rng;
        let steps = 400;
        let paths = 40_000;
        let dt = 1.0 / steps as f64;
        let mut acc = 0.0;
        for p in 0..paths {
            let mut rng = crate::rng::substream(55, p as u64);
            let mut b: f64 = 0.0;
            let mut integral = 0.0;
            for _ in 0..steps {
                integral += b.abs().powi(3) * dt;
                let u1: f64 = rng.gen::<f64>().max(1e-300);
                let u2: f64 = rng.gen();
                let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                b += z * dt.sqrt();
            }
            acc += integral;
        }
        let est = acc / paths as f64;
        let target = brownian_targets().var_target;
        assert!((est - target).abs() < 0.03, "est={est} target={target}");
    }

    #[test]
    fn free_gaussian_check_converges_in_t() {
        let law = KickLaw::default_laplace();
        let grid: Vec<f64> = (0..=12).map(|i| -3.0 + 6.0 * i as f64 / 12.0).collect();
        let d4 = free_gaussian_check(1.0, 1e4, &grid, &law).unwrap();
        let d6 = free_gaussian_check(1.0, 1e6, &grid, &law).unwrap();
        assert!(d6 < d4, "d4={d4} d6={d6}");
        assert!(d6 < 1e-3, "d6={d6}");
        // v = 0: both sides exactly 1
        let d0 = free_gaussian_check(1.0, 1e4, &[0.0], &law).unwrap();
        assert!(d0 < 1e-9);
    }

    #[test]
    fn free_gaussian_matches_laplace_closed_form() {
        // for Laplace, the r-integral is (R/(cb))·arctan(bct) − Rt
        let law = KickLaw::default_laplace();
        let (lambda, t, v) = (1.0f64, 1e4f64, 1.7f64);
        let c = t.powf(-1.5) * (2.0 / lambda) * v;
        let closed = ((1.0 / c) * (c * t).atan() - t).exp();
        let target = (-(2.0 * law.sigma) / (3.0 * lambda * lambda) * v * v).exp();
        let dev_closed = (closed - target).abs();
        let dev_quad = free_gaussian_check(lambda, t, &[v], &law).unwrap();
        assert!((dev_closed - dev_quad).abs() < 1e-7);
    }
}
