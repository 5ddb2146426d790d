//! Plane-wave expansion coefficients η(k,n) of the Bloch eigenkets.
//!
//! |k⟩ = Σ_n η(k,n)|k+n⟩ with
//! η(k,n) = −i N_k^{−1/2} (e^{2πi(𝐪−k)} − 1) (1/(𝐪+k+n) + 1/(𝐪−k−n)).
//! The raw terms decay like 1/n² away from the two poles n ≈ −(𝐪+k) and
//! n ≈ 𝐪−k.  The normalization sum has the closed form
//!
//! ```text
//! Σ_n (1/(x+n) + 1/(y−n))² = π²/sin²(πx) + π²/sin²(πy) + 2π(cot πx + cot πy)/(x+y)
//! ```
//!
//! with x = 𝐪+k, y = 𝐪−k, so rows carry an exact norm and the window tail is
//! rigorous rather than estimated.

use num_complex::Complex64;

use super::{sin2pi, BlochError, CombParams};

#[derive(Debug, Clone)]
pub struct EtaRow {
    pub k: f64,
    pub q: f64,
    /// inclusive window of lattice indices n
    pub lo: i64,
    pub hi: i64,
    /// η(k,n) for n in lo..=hi, normalized so the full-line sum of |η|² is 1
    pub coeffs: Vec<Complex64>,
    /// N_k: the exact raw squared-mass sum over the full line
    pub norm_const: f64,
    /// squared mass outside the window (exact up to roundoff)
    pub tail_bound: f64,
}

impl EtaRow {
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n < self.lo || n > self.hi {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n - self.lo) as usize]
        }
    }

    pub fn window_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[inline]
fn raw_term(q: f64, k: f64, n: f64) -> f64 {
    1.0 / (q + k + n) + 1.0 / (q - k - n)
}

#[inline]
fn sinpi_sq(x: f64) -> f64 {
    let r = x - x.round();
    let s = (std::f64::consts::PI * r).sin();
    s * s
}

#[inline]
fn cotpi(x: f64) -> f64 {
    let r = x - x.round();
    let t = (std::f64::consts::PI * r).tan();
    1.0 / t
}

/// Exact full-line value of Σ_n (1/(q+k+n) + 1/(q−k−n))².
#[inline]
fn raw_norm_closed(q: f64, k: f64) -> f64 {
    let x = q + k;
    let y = q - k;
    let pi = std::f64::consts::PI;
    pi * pi / sinpi_sq(x) + pi * pi / sinpi_sq(y) + 2.0 * pi * (cotpi(x) + cotpi(y)) / (x + y)
}

/// Build the η row for k ∉ ½ℤ on a window that must contain the special
/// indices 0 and −𝐧(k).
pub fn eta_row(
    k: f64,
    lo: i64,
    hi: i64,
    comb: &CombParams,
) -> Result<EtaRow, BlochError> {
    let nk = super::coords::band_coords(k).nhalf;
    let mut missing = Vec::new();
    if !(lo..=hi).contains(&0) {
        missing.push(0);
    }
    if !(lo..=hi).contains(&(-nk)) {
        missing.push(-nk);
    }
    if !missing.is_empty() {
        return Err(BlochError::WindowTooSmall { lo, hi, missing });
    }
    let q = comb.quasimomentum(k)?;
    let norm_raw = raw_norm_closed(q, k);
    let phase = Complex64::new(super::cos2pi(q - k) - 1.0, sin2pi(q - k));
    // N_k = |e^{2pi i(q-k)} - 1|^2 · Σ|raw|^2; η = -i·phase·raw/√N_k
    let norm_const = phase.norm_sqr() * norm_raw;
    let pref = Complex64::new(0.0, -1.0) * phase / norm_const.sqrt();
    let coeffs: Vec<Complex64> = (lo..=hi)
        .map(|n| pref * raw_term(q, k, n as f64))
        .collect();

    let window_mass: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let tail_bound = (1.0 - window_mass).max(0.0);

    Ok(EtaRow {
        k,
        q,
        lo,
        hi,
        coeffs,
        norm_const,
        tail_bound,
    })
}

/// Lightweight per-momentum table used in the κ convolutions and samplers:
/// carries the prefactor with the exact norm, evaluates single coefficients
/// in O(1).
pub(crate) struct EtaTable {
    pub q: f64,
    pub k: f64,
    pref: Complex64,
}

impl EtaTable {
    pub fn new(k: f64, comb: &CombParams) -> Result<Self, BlochError> {
        let q = comb.quasimomentum(k)?;
        Ok(Self::from_q(k, q))
    }

    pub fn from_q(k: f64, q: f64) -> Self {
        let norm_raw = raw_norm_closed(q, k);
        let phase = Complex64::new(super::cos2pi(q - k) - 1.0, sin2pi(q - k));
        let pref = Complex64::new(0.0, -1.0) * phase / (phase.norm_sqr() * norm_raw).sqrt();
        EtaTable { q, k, pref }
    }

    #[inline]
    pub fn eta(&self, n: i64) -> Complex64 {
        self.pref * raw_term(self.q, self.k, n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{band_coords, nudge_half_integer, reflection_quantities};
    use rand::Rng;

    #[test]
    fn normalization_over_random_momenta() {
        let comb = CombParams::new(1.0, 210.0).unwrap();
        let mut rng = crate::rng::substream(11, 0);
        for _ in 0..50 {
            let k = nudge_half_integer(5.0 + 195.0 * rng.gen::<f64>());
            let n = band_coords(k).nhalf;
            let row = eta_row(k, -n.abs() - 400, n.abs() + 400, &comb).unwrap();
            let mass = row.window_mass();
            assert!(
                (mass - 1.0).abs() < 1e-8,
                "norm broke at k={k}: mass={mass}, tail={}",
                row.tail_bound
            );
            assert!(mass <= 1.0 + 1e-12);
            assert!((mass + row.tail_bound - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn window_must_contain_special_indices() {
        let comb = CombParams::new(1.0, 20.0).unwrap();
        let err = eta_row(7.3, -5, 5, &comb).unwrap_err();
        assert!(matches!(err, BlochError::WindowTooSmall { .. }));
    }

    #[test]
    fn n0_dominates_away_from_band_center() {
        let comb = CombParams::new(1.0, 110.0).unwrap();
        let row = eta_row(100.26, -420, 420, &comb).unwrap();
        assert!(row.coeff(0).norm_sqr() > 0.99);
    }

    #[test]
    fn asymptotic_split_matches_reflection_weights() {
        // for k = n/2 + 2 beta/n with n large, |eta(k,0)|^2 -> r+(k) at rate 1/|k|
        let comb = CombParams::new(1.0, 160.0).unwrap();
        let n = 300.0;
        for &beta in &[0.1, 0.5, 2.0] {
            let k = n / 2.0 + 2.0 * beta / n;
            let row = eta_row(k, -320, 320, &comb).unwrap();
            let r = reflection_quantities(1.0, k);
            let d0 = (row.coeff(0).norm_sqr() - r.r_plus).abs();
            let d1 = (row.coeff(-300).norm_sqr() - r.r_minus).abs();
            assert!(d0 < 2.0 / k, "beta={beta}: {d0}");
            assert!(d1 < 2.0 / k, "beta={beta}: {d1}");
        }
    }

    #[test]
    fn table_agrees_with_row() {
        let comb = CombParams::new(1.0, 40.0).unwrap();
        let k = 33.17;
        let row = eta_row(k, -80, 80, &comb).unwrap();
        let table = EtaTable::new(k, &comb).unwrap();
        for n in [-70i64, -66, -3, 0, 5, 71] {
            let d = (row.coeff(n) - table.eta(n)).norm();
            assert!(d < 1e-12, "n={n}: {d}");
        }
    }
}
