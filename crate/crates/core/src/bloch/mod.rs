//! Spectral core for the period-2π Dirac comb of strength α.
//!
//! The Hamiltonian H = P² + α·Σ_m δ(X − 2πm) diagonalizes in the extended-zone
//! scheme over kets |k⟩ with energies E(k) = 𝐪²(k), where 𝐪(k) solves the
//! Krönig-Penney relation
//!
//! ```text
//! cos(2πk) = cos(2π𝐪) + (α/2𝐪)·sin(2π𝐪),     𝐪(n/2) = n/2.
//! ```
//!
//! Each ket is a discrete superposition of plane waves, |k⟩ = Σ_n η(k,n)|k+n⟩,
//! and a momentum boost e^{ivX} scatters a ket over its lattice translates with
//! amplitudes κ_v(k,n).  The |κ|² are the branch probabilities that drive the
//! classical momentum jump process; near half-integers they reduce to the
//! two-wave reflection weights 𝐫_±.

mod comb;
mod coords;
mod eta;
mod kappa;
mod oracle;

pub use comb::CombParams;
pub use coords::{band_coords, reflection_quantities, BandCoords, ReflectionQuantities};
pub use eta::{eta_row, EtaRow};
pub(crate) use eta::EtaTable;
pub use kappa::{
    kappa_amplitude, kappa_row, sample_lattice_jump, special_set, KappaRow, KappaSource,
    TruncationPolicy,
};
pub use oracle::{bloch_function_norm, kappa_oracle, BlochFunction};

use thiserror::Error;

/// Half-integer grid tolerance: values this close to ½ℤ are nudged off it
/// before any spectral evaluation (the eigenkets are discontinuous there).
pub const HALF_INT_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BlochError {
    #[error("root find for q(k) did not converge at k={k} (alpha={alpha})")]
    NonConvergence { k: f64, alpha: f64 },
    #[error("k={0} is a half-integer; q(k) is only defined off the lattice")]
    HalfIntegerInput(f64),
    #[error("window {lo}..={hi} must contain the special indices {missing:?}")]
    WindowTooSmall { lo: i64, hi: i64, missing: Vec<i64> },
    #[error("kappa tail budget exceeded: tail mass {tail:e} >= {budget:e} at window cap {cap}")]
    TailBudgetExceeded { tail: f64, budget: f64, cap: i64 },
    #[error(transparent)]
    Quadrature(#[from] crate::quad::QuadError),
}

/// cos(2πx) with the argument reduced to the nearest integer first, which
/// keeps full precision for |x| up to ~1e15.
#[inline]
pub(crate) fn cos2pi(x: f64) -> f64 {
    let r = x - x.round();
    (2.0 * std::f64::consts::PI * r).cos()
}

#[inline]
pub(crate) fn sin2pi(x: f64) -> f64 {
    let r = x - x.round();
    let s = (2.0 * std::f64::consts::PI * r).sin();
    // sin(2pi x) = sin(2pi r) exactly: round() shifts by an integer
    s
}

/// Nudge k off the half-integer lattice by +1e-12 when it falls within
/// 1e-12 of it.  A measure-zero fix for all laws used by the simulators.
#[inline]
pub fn nudge_half_integer(k: f64) -> f64 {
    let d = 2.0 * k - (2.0 * k).round();
    if d.abs() < 2.0 * HALF_INT_EPS {
        k + HALF_INT_EPS
    } else {
        k
    }
}

#[inline]
pub(crate) fn is_half_integer(k: f64) -> bool {
    let d = 2.0 * k - (2.0 * k).round();
    d.abs() < 2.0 * HALF_INT_EPS
}
