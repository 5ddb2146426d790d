//! Master-equation jump kernel J(k,k′) and the contracted torus chain.
//!
//! J(k_to, k_from) = Σ_n j(k_to − k_from − n) |κ_{k_to−k_from−n}(k_from, n)|².
//! Integrating over k_to recovers the constant escape rate 𝓡 by unitarity of
//! the kick; the outgoing mass splits between a j-width neighborhood of
//! k_from (transmission channels n ≈ 0) and its mirror near −k_from (the
//! Bragg channels n ≈ −𝐧(k_from + v)).  On the torus 𝕋 = [−¼, ¼) the lattice
//! jumps drop out and the momentum contracts to a chain with the symmetric
//! kernel 𝐓(θ₂, θ₁) = 𝓡⁻¹ Σ_i j(θ₂ − θ₁ + i/2).

use thiserror::Error;

use crate::bloch::{self, band_coords, CombParams, KappaSource};
use crate::kick::KickLaw;
use crate::quad;

#[derive(Debug, Error)]
pub enum RatesError {
    #[error(transparent)]
    Bloch(#[from] bloch::BlochError),
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
}

/// Kick-size cutoff with ∫_{|v| > V} j < 1e-8·𝓡 (Laplace: ≈ 19 b).
pub fn v_cutoff(law: &KickLaw) -> f64 {
    let mut v = 1.0;
    while 2.0 * law.density(v) * (1.0 + v) > 1e-8 * law.rate && v < 1e4 {
        v += 0.5;
    }
    v
}

/// Default per-amplitude truncation for kernel evaluations.
const KERNEL_M_TAIL: f64 = 1e-10;

/// Pointwise jump rate J(k_to, k_from).
pub fn jump_rate(
    k_to: f64,
    k_from: f64,
    law: &KickLaw,
    comb: &CombParams,
) -> Result<f64, RatesError> {
    let src = KappaSource::new(k_from, comb)?;
    let w = k_to - src.k();
    let vcut = v_cutoff(law);
    let lo = (w - vcut).floor() as i64;
    let hi = (w + vcut).ceil() as i64;
    let mut total = 0.0;
    for n in lo..=hi {
        let v = w - n as f64;
        let j = law.density(v);
        if j < 1e-14 * law.rate {
            continue;
        }
        total += j * src.amplitude(v, n, KERNEL_M_TAIL)?.norm_sqr();
    }
    Ok(total)
}

/// The lattice channels that carry outgoing mass from momentum k for kicks up
/// to `vcut`: a symmetric window (transmission and same-side channels) plus a
/// window around −𝐧(k) covering the v-dependent Bragg channels.
fn channel_list(k: f64, vcut: f64) -> Vec<i64> {
    let nk = band_coords(k).nhalf;
    let near = 32i64.max(2 * vcut.ceil() as i64 + 8);
    let refl = 2 * vcut.ceil() as i64 + 8;
    let mut idx: Vec<i64> = (-near..=near).collect();
    for n in (-nk - refl)..=(-nk + refl) {
        idx.push(n);
    }
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// The kick coefficients develop reflection spikes of width O(α/|k|)
/// wherever k+v crosses a half-integer; pre-splitting the v-integration at
/// the crossings keeps them from slipping between quadrature nodes.
fn lattice_crossings(k: f64, vcut: f64) -> Vec<f64> {
    let lo = (2.0 * (k - vcut)).ceil() as i64;
    let hi = (2.0 * (k + vcut)).floor() as i64;
    (lo..=hi).map(|m| m as f64 / 2.0 - k).collect()
}

/// Escape rate by channelwise adaptive quadrature:
/// Σ_n ∫ dv j(v)|κ_v(k,n)|².  Equals 𝓡 within 1e-4 for any k off the lattice.
pub fn escape_rate_quadrature(
    k: f64,
    law: &KickLaw,
    comb: &CombParams,
) -> Result<f64, RatesError> {
    let src = KappaSource::new(k, comb)?;
    let vcut = v_cutoff(law);
    let channels = channel_list(src.k(), vcut);
    let splits = lattice_crossings(src.k(), vcut);
    let per_channel_tol = 2e-6 * law.rate / channels.len() as f64;
    let mut total = 0.0;
    for &n in &channels {
        let f = |v: f64| -> f64 {
            let j = law.density(v);
            if j < 1e-14 * law.rate {
                return 0.0;
            }
            match src.amplitude(v, n, KERNEL_M_TAIL) {
                Ok(a) => j * a.norm_sqr(),
                Err(_) => 0.0,
            }
        };
        total += quad::integrate_split(f, -vcut, vcut, &splits, per_channel_tol)?;
    }
    Ok(total)
}

/// Expected landing probabilities for one jump from k over a set of bins in
/// k′, computed channel by channel (used as the χ² reference distribution).
/// `edges` are ascending; returns one probability per bin plus the overflow
/// mass appended last.
pub fn binned_transition_probabilities(
    k: f64,
    edges: &[f64],
    law: &KickLaw,
    comb: &CombParams,
) -> Result<Vec<f64>, RatesError> {
    let src = KappaSource::new(k, comb)?;
    let vcut = v_cutoff(law);
    let channels = channel_list(src.k(), vcut);
    let splits = lattice_crossings(src.k(), vcut);
    let nbins = edges.len() - 1;
    let mut probs = vec![0.0; nbins + 1];
    let mut captured = 0.0;
    for &n in &channels {
        for b in 0..nbins {
            // landing bin k' in [e0, e1) corresponds to v in [e0-k-n, e1-k-n)
            let u0 = (edges[b] - src.k() - n as f64).max(-vcut);
            let u1 = (edges[b + 1] - src.k() - n as f64).min(vcut);
            if u1 <= u0 {
                continue;
            }
            let f = |v: f64| -> f64 {
                let j = law.density(v);
                if j < 1e-14 * law.rate {
                    return 0.0;
                }
                match src.amplitude(v, n, KERNEL_M_TAIL) {
                    Ok(a) => j * a.norm_sqr(),
                    Err(_) => 0.0,
                }
            };
            let m = quad::integrate_split(f, u0, u1, &splits, 1e-7 * law.rate)? / law.rate;
            probs[b] += m;
            captured += m;
        }
    }
    probs[nbins] = (1.0 - captured).max(0.0);
    Ok(probs)
}

/// The contracted transition kernel on the torus [−¼, ¼).
#[derive(Debug, Clone)]
pub struct TorusKernel {
    law: KickLaw,
}

impl TorusKernel {
    pub fn new(law: &KickLaw) -> Self {
        TorusKernel { law: law.clone() }
    }

    /// 𝐓(θ₂, θ₁) = 𝓡⁻¹ Σ_i j(θ₂ − θ₁ + i/2); symmetric in its arguments.
    pub fn evaluate(&self, theta2: f64, theta1: f64) -> f64 {
        self.law.torus_contraction(theta2 - theta1) / self.law.rate
    }

    /// Apply to a density sampled on a uniform grid over [−¼, ¼); the slice
    /// holds density values (a uniform density is the constant 2).  The
    /// discrete operator is the circulant midpoint rule normalized to be
    /// exactly stochastic, so the uniform density is an exact fixed point at
    /// any grid size.
    pub fn apply(&self, density: &[f64]) -> Vec<f64> {
        let n = density.len();
        // kernel depends only on theta2 - theta1; one column suffices
        let col: Vec<f64> = (0..n)
            .map(|j| self.evaluate(grid_point(j, n), grid_point(0, n)))
            .collect();
        let row_sum: f64 = col.iter().sum();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for (j, d) in density.iter().enumerate() {
                    let diff = (i as i64 - j as i64).rem_euclid(n as i64) as usize;
                    acc += col[diff] * d;
                }
                acc / row_sum
            })
            .collect()
    }

    /// Geometric decay rate of sup|𝐓ⁿδ − uniform| by power iteration of the
    /// deviation-from-uniform operator.
    pub fn mixing_rate(&self, grid: usize, iters: usize) -> f64 {
        let mut dev: Vec<f64> = (0..grid)
            .map(|i| if i == grid / 3 { 2.0 * grid as f64 - 2.0 } else { -2.0 })
            .collect();
        let mut prev_norm = sup_abs(&dev);
        let mut rate: f64 = 0.0;
        for _ in 0..iters {
            dev = self.apply(&dev);
            let mean = dev.iter().sum::<f64>() / grid as f64;
            for d in dev.iter_mut() {
                *d -= mean;
            }
            let norm = sup_abs(&dev);
            rate = norm / prev_norm.max(1e-300);
            prev_norm = norm;
        }
        rate
    }
}

fn grid_point(i: usize, n: usize) -> f64 {
    -0.25 + 0.5 * (i as f64 + 0.5) / n as f64
}

fn sup_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{kappa_row, TruncationPolicy};
    use rand::Rng;

    #[test]
    fn jump_rate_nonnegative_random_pairs() {
        let comb = CombParams::new(1.0, 70.0).unwrap();
        let law = KickLaw::default_laplace();
        let mut rng = crate::rng::substream(17, 0);
        for _ in 0..25 {
            let k = 10.0 + 40.0 * rng.gen::<f64>();
            let kp = k + 6.0 * rng.gen::<f64>() - 3.0;
            let j = jump_rate(kp, k, &law, &comb).unwrap();
            assert!(j >= 0.0);
        }
    }

    #[test]
    fn brute_force_cross_check() {
        // J(20.9, 20.2) against a direct double-sum with a wide window and a
        // strict row policy
        let comb = CombParams::new(1.0, 40.0).unwrap();
        let law = KickLaw::default_laplace();
        let fast = jump_rate(20.9, 20.2, &law, &comb).unwrap();
        let strict = TruncationPolicy {
            epsilon: 1e-6,
            m_tail: 1e-13,
            max_halfwidth: 4096,
        };
        let mut brute = 0.0;
        for n in -200i64..=200 {
            let v = 20.9 - 20.2 - n as f64;
            let j = law.density(v);
            if j < 1e-16 {
                continue;
            }
            let row = kappa_row(20.2, v, &strict, &comb).unwrap();
            brute += j * row.amplitude(n).norm_sqr();
        }
        assert!(
            (fast - brute).abs() < 1e-8,
            "fast={fast:.12e} brute={brute:.12e}"
        );
    }

    #[test]
    fn torus_kernel_symmetric_and_uniform_fixed_point() {
        let law = KickLaw::default_laplace();
        let t = TorusKernel::new(&law);
        for i in 0..40 {
            for j in 0..40 {
                let a = grid_point(i, 40);
                let b = grid_point(j, 40);
                let d = (t.evaluate(a, b) - t.evaluate(b, a)).abs();
                assert!(d < 1e-14, "asymmetry {d} at ({a},{b})");
            }
        }
        let uniform = vec![2.0; 128];
        let img = t.apply(&uniform);
        for x in img {
            assert!((x - 2.0).abs() < 1e-8, "fixed point broke: {x}");
        }
    }

    #[test]
    fn torus_mixing_is_geometric() {
        let law = KickLaw::default_laplace();
        let t = TorusKernel::new(&law);
        let rate = t.mixing_rate(128, 12);
        assert!(rate > 0.0 && rate < 0.9, "mixing rate {rate}");
    }
}
