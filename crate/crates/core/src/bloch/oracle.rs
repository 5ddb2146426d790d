//! Independent quadrature route to the kick coefficients.
//!
//! The Bloch eigenfunctions of the Dirac comb have a closed piecewise form on
//! the fundamental cell [−π, π) (two counter-propagating waves matched at the
//! δ-sites), so κ_v(k,n) = ⟨ψ̃_{k+v+n}, e^{ivx} ψ̃_k⟩ can be computed by
//! adaptive quadrature with no reference to the η series.  This is the oracle
//! against which the series route is verified.

use num_complex::Complex64;

use super::{BlochError, CombParams};
use crate::quad;

/// Closed-form Bloch function ψ̃_k on [−π, π), unnormalized, with its
/// quadrature norm ∫|ψ̃|² cached.
pub struct BlochFunction {
    pub k: f64,
    pub q: f64,
    coef_left: Complex64,
    phase_left: Complex64,
    coef_right: Complex64,
    norm_sq: f64,
}

fn expi(x: f64) -> Complex64 {
    Complex64::new(x.cos(), x.sin())
}

fn expi2pi(x: f64) -> Complex64 {
    let r = x - x.round();
    expi(2.0 * std::f64::consts::PI * r)
}

impl BlochFunction {
    pub fn new(k: f64, comb: &CombParams) -> Result<Self, BlochError> {
        let q = comb.quasimomentum(k)?;
        let a = expi2pi(q - k) - Complex64::new(1.0, 0.0);
        let denom_left = expi2pi(q + k) - Complex64::new(1.0, 0.0);
        let denom_right = Complex64::new(1.0, 0.0) - expi2pi(-(q + k));
        let mut f = BlochFunction {
            k,
            q,
            coef_left: a / denom_left,
            phase_left: expi2pi(q - k),
            coef_right: a / denom_right,
            norm_sq: 1.0,
        };
        let norm = quad::integrate_split(|x| f.raw(x).norm_sqr(), -std::f64::consts::PI,
            std::f64::consts::PI, &[0.0], 1e-10)?;
        f.norm_sq = norm;
        Ok(f)
    }

    /// Unnormalized value.
    #[inline]
    pub fn raw(&self, x: f64) -> Complex64 {
        if x <= 0.0 {
            self.coef_left * expi(-x * self.q) + self.phase_left * expi(x * self.q)
        } else {
            self.coef_right * expi(-x * self.q) + expi(x * self.q)
        }
    }

    /// Normalized value ψ̃_k(x).
    #[inline]
    pub fn value(&self, x: f64) -> Complex64 {
        self.raw(x) / self.norm_sq.sqrt()
    }

    pub fn norm_sq_raw(&self) -> f64 {
        self.norm_sq
    }
}

/// Quadrature norm of ψ̃_k (should be 1 after normalization; exposed for tests).
pub fn bloch_function_norm(k: f64, comb: &CombParams) -> Result<f64, BlochError> {
    let f = BlochFunction::new(k, comb)?;
    let pi = std::f64::consts::PI;
    Ok(quad::integrate_split(|x| f.value(x).norm_sqr(), -pi, pi, &[0.0], 1e-10)?)
}

/// κ_v(k,n) = ⟨ψ̃_{k+v+n}, e^{ivx} ψ̃_k⟩ by adaptive quadrature on [−π, π),
/// split at x = 0 where the piecewise form changes.
pub fn kappa_oracle(
    k: f64,
    v: f64,
    n: i64,
    comb: &CombParams,
) -> Result<Complex64, BlochError> {
    let f1 = BlochFunction::new(super::nudge_half_integer(k), comb)?;
    let f2 = BlochFunction::new(super::nudge_half_integer(k + v + n as f64), comb)?;
    let pi = std::f64::consts::PI;
    let integrand_re =
        |x: f64| (f2.raw(x).conj() * expi(v * x) * f1.raw(x)).re;
    let integrand_im =
        |x: f64| (f2.raw(x).conj() * expi(v * x) * f1.raw(x)).im;
    let tol = 1e-9 * (f1.norm_sq * f2.norm_sq).sqrt().max(1.0);
    let re = quad::integrate_split(integrand_re, -pi, pi, &[0.0], tol)?;
    let im = quad::integrate_split(integrand_im, -pi, pi, &[0.0], tol)?;
    Ok(Complex64::new(re, im) / (f1.norm_sq * f2.norm_sq).sqrt())
}
