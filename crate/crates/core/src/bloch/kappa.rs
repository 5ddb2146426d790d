//! Kick coefficients κ_v(k,n): the amplitudes of the lattice branches when a
//! momentum boost e^{ivX} acts on a Bloch ket,
//!
//! ```text
//! e^{ivX}|k⟩ = Σ_n κ_v(k,n)|k+v+n⟩,     κ_v(k,n) = Σ_m η̄(k+v+n, m−n)·η(k,m).
//! ```
//!
//! The m-series has four pole neighborhoods, at m ≈ 0, −𝐧(k), n, −n−𝐧(k+v);
//! terms decay like 1/m⁴ away from them.  Rows carry the truncated support,
//! the discarded squared mass, and the renormalized branch probabilities.

use num_complex::Complex64;

use super::coords::band_coords;
use super::eta::EtaTable;
use super::{is_half_integer, nudge_half_integer, BlochError, CombParams};

/// Truncation policy for κ rows.
#[derive(Debug, Clone, Copy)]
pub struct TruncationPolicy {
    /// tail-mass budget: the row widens until the discarded mass is below this
    pub epsilon: f64,
    /// absolute truncation target for each amplitude's m-series
    pub m_tail: f64,
    /// hard cap on the symmetric support half-width
    pub max_halfwidth: i64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            epsilon: 1e-6,
            m_tail: 1e-12,
            max_halfwidth: 4096,
        }
    }
}

impl TruncationPolicy {
    /// Coarser policy for per-event sampling, where per-step bias ~1e-7 in
    /// total variation is far below any statistic resolved by the ensembles.
    pub fn sampling() -> Self {
        TruncationPolicy {
            epsilon: 1e-6,
            m_tail: 1e-9,
            max_halfwidth: 4096,
        }
    }

    /// Default symmetric half-width before widening.
    pub fn base_halfwidth(&self, alpha: f64, v: f64) -> i64 {
        32i64
            .max((4.0 * alpha).ceil() as i64 + v.abs().ceil() as i64 + 2)
            .min(self.max_halfwidth)
    }
}

/// One truncated row of kick coefficients at fixed (k, v).
#[derive(Debug, Clone)]
pub struct KappaRow {
    pub k: f64,
    pub v: f64,
    /// lattice indices, ascending
    pub indices: Vec<i64>,
    /// raw amplitudes κ_v(k,n)
    pub amplitudes: Vec<Complex64>,
    /// renormalized branch probabilities (sum to 1 over the support)
    pub weights: Vec<f64>,
    /// squared mass discarded by the truncation, before renormalization
    pub tail_mass: f64,
    /// the special set I(k,v) = {0, −𝐧(k), −𝐧(k+v), −𝐧(k+v)+𝐧(k)}, deduplicated
    pub special_set: Vec<i64>,
}

impl KappaRow {
    pub fn weight(&self, n: i64) -> f64 {
        match self.indices.binary_search(&n) {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    pub fn amplitude(&self, n: i64) -> Complex64 {
        match self.indices.binary_search(&n) {
            Ok(i) => self.amplitudes[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Squared mass on the support before renormalization.
    pub fn raw_mass(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Draw a lattice index from the branch probabilities.
    pub fn sample(&self, u: f64) -> i64 {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return self.indices[i];
            }
        }
        *self.indices.last().expect("non-empty support")
    }
}

/// The special lattice jumps I(k,v), deduplicated and sorted.
pub fn special_set(k: f64, v: f64) -> Vec<i64> {
    let nk = band_coords(k).nhalf;
    let nkv = band_coords(k + v).nhalf;
    let mut s = vec![0, -nk, -nkv, -nkv + nk];
    s.sort_unstable();
    s.dedup();
    s
}

/// Single amplitude κ_v(k,n) by the η convolution, with an error estimate for
/// the m-series truncation.  `m_tail` is the absolute target.
pub(crate) fn kappa_amplitude_tables(
    eta_k: &EtaTable,
    eta_kvn: &EtaTable,
    nk: i64,
    nkv: i64,
    n: i64,
    m_tail: f64,
) -> (Complex64, f64) {
    // pole neighborhoods of the product in m
    let centers = [0, -nk, n, -n - nkv];
    let base = 24i64;
    let mut ivals: Vec<(i64, i64)> = centers.iter().map(|&c| (c - base, c + base)).collect();
    ivals.sort_unstable();
    let mut merged: Vec<(i64, i64)> = Vec::with_capacity(4);
    for iv in ivals {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 + 1 => last.1 = last.1.max(iv.1),
            _ => merged.push(iv),
        }
    }
    let term = |m: i64| eta_kvn.eta(m - n).conj() * eta_k.eta(m);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut i = 0;
    while i < merged.len() {
        let (mut lo, mut hi) = merged[i];
        // grow outward while the boundary terms are above the cut
        let cut = m_tail / 16.0;
        for _ in 0..512 {
            if term(lo).norm() > cut
                && (i == 0 || lo > merged[i - 1].1 + 1)
            {
                lo -= 8;
            } else {
                break;
            }
        }
        for _ in 0..512 {
            if term(hi).norm() > cut
                && (i + 1 == merged.len() || hi < merged[i + 1].0 - 1)
            {
                hi += 8;
            } else {
                break;
            }
        }
        // merge with the next interval if growth bridged the gap
        if i + 1 < merged.len() && hi >= merged[i + 1].0 - 1 {
            merged[i + 1].0 = lo;
            i += 1;
            continue;
        }
        for m in lo..=hi {
            sum += term(m);
        }
        // the tail beyond an edge at distance d from its pole decays like
        // (d/(d+s))^4, which integrates to ~d/3 boundary terms
        let c = 2.0 + (hi - lo) as f64 / 4.0;
        err += (term(lo - 1).norm() + term(hi + 1).norm()) * c;
        i += 1;
    }
    (sum, err)
}

/// Single amplitude κ_v(k,n) without row bookkeeping.  `m_tail` is the
/// absolute truncation target for the η convolution.
pub fn kappa_amplitude(
    k: f64,
    v: f64,
    n: i64,
    m_tail: f64,
    comb: &CombParams,
) -> Result<Complex64, BlochError> {
    let k = nudge_half_integer(k);
    let nk = band_coords(k).nhalf;
    let nkv = band_coords(k + v).nhalf;
    let eta_k = EtaTable::new(k, comb)?;
    let eta_kvn = EtaTable::new(nudge_half_integer(k + v + n as f64), comb)?;
    Ok(kappa_amplitude_tables(&eta_k, &eta_kvn, nk, nkv, n, m_tail).0)
}

/// Reusable context for many amplitudes at the same source momentum k.
pub struct KappaSource<'a> {
    comb: &'a CombParams,
    eta_k: EtaTable,
    k: f64,
    nk: i64,
}

impl<'a> KappaSource<'a> {
    pub fn new(k: f64, comb: &'a CombParams) -> Result<Self, BlochError> {
        let k = nudge_half_integer(k);
        let eta_k = EtaTable::new(k, comb)?;
        let nk = band_coords(k).nhalf;
        Ok(KappaSource { comb, eta_k, k, nk })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn amplitude(&self, v: f64, n: i64, m_tail: f64) -> Result<Complex64, BlochError> {
        let nkv = band_coords(self.k + v).nhalf;
        let eta_kvn = EtaTable::new(nudge_half_integer(self.k + v + n as f64), self.comb)?;
        Ok(kappa_amplitude_tables(&self.eta_k, &eta_kvn, self.nk, nkv, n, m_tail).0)
    }
}

/// Build the κ row at (k, v) under `policy`.  k and k+v are nudged off ½ℤ.
pub fn kappa_row(
    k: f64,
    v: f64,
    policy: &TruncationPolicy,
    comb: &CombParams,
) -> Result<KappaRow, BlochError> {
    let k = nudge_half_integer(k);
    let v = if is_half_integer(k + v) {
        nudge_half_integer(k + v) - k
    } else {
        v
    };
    let nk = band_coords(k).nhalf;
    let nkv = band_coords(k + v).nhalf;
    let special = special_set(k, v);
    let eta_k = EtaTable::new(k, comb)?;

    let mut half = policy.base_halfwidth(comb.alpha(), v);
    loop {
        // support: symmetric window plus neighborhoods of the special indices
        let pad = (half / 2).max(16);
        let mut idx: Vec<i64> = (-half..=half).collect();
        for &s in &special {
            for j in (s - pad)..=(s + pad) {
                idx.push(j);
            }
        }
        idx.sort_unstable();
        idx.dedup();

        let mut amplitudes = Vec::with_capacity(idx.len());
        let mut mass = 0.0;
        let mut err_total = 0.0;
        for &n in &idx {
            let eta_kvn = EtaTable::new(nudge_half_integer(k + v + n as f64), comb)?;
            let (a, err) =
                kappa_amplitude_tables(&eta_k, &eta_kvn, nk, nkv, n, policy.m_tail);
            mass += a.norm_sqr();
            err_total += 2.0 * a.norm() * err;
            amplitudes.push(a);
        }
        let tail_mass = (1.0 - mass).max(0.0);
        if tail_mass < policy.epsilon || half >= policy.max_halfwidth {
            if tail_mass >= policy.epsilon {
                return Err(BlochError::TailBudgetExceeded {
                    tail: tail_mass,
                    budget: policy.epsilon,
                    cap: policy.max_halfwidth,
                });
            }
            debug_assert!(mass <= 1.0 + 1e-10 + err_total);
            let weights: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr() / mass).collect();
            return Ok(KappaRow {
                k,
                v,
                indices: idx,
                amplitudes,
                weights,
                tail_mass,
                special_set: special,
            });
        }
        half = (half * 2).min(policy.max_halfwidth);
    }
}

/// Fast event-loop sampler for the lattice component of a jump from k with
/// Lévy increment v.
///
/// At high momentum the exact branch mass concentrates on the special set
/// I(k,v) up to an O(k⁻²) remainder (and that asymptotic window policy is
/// invalid for small |k|, where the wide exact window is used instead).  The
/// decomposition is exact: the four special weights are computed from the
/// η convolution and the remainder probability falls back to the full row
/// restricted to the non-special indices.
pub fn sample_lattice_jump<R: rand::Rng>(
    k: f64,
    v: f64,
    comb: &CombParams,
    rng: &mut R,
) -> Result<i64, BlochError> {
    let k = nudge_half_integer(k);
    if k.abs() >= 12.0 && v.abs() <= 0.5 * k.abs() {
        let nk = band_coords(k).nhalf;
        let nkv = band_coords(k + v).nhalf;
        let special = special_set(k, v);
        let eta_k = EtaTable::new(k, comb)?;
        let mut w = [0.0f64; 4];
        let mut total = 0.0;
        for (i, &n) in special.iter().enumerate() {
            let eta_kvn = EtaTable::new(nudge_half_integer(k + v + n as f64), comb)?;
            let (a, _) = kappa_amplitude_tables(&eta_k, &eta_kvn, nk, nkv, n, 1e-9);
            w[i] = a.norm_sqr();
            total += w[i];
        }
        let u: f64 = rng.gen::<f64>();
        if u < total {
            let mut acc = 0.0;
            for (i, &n) in special.iter().enumerate() {
                acc += w[i];
                if u < acc {
                    return Ok(n);
                }
            }
        }
        // remainder branch: exact conditional sampling from the full row
        // with the special indices removed
        let row = kappa_row(k, v, &TruncationPolicy::sampling(), comb)?;
        let mut rest: Vec<(i64, f64)> = Vec::with_capacity(row.indices.len());
        let mut rest_mass = 0.0;
        for (i, &n) in row.indices.iter().enumerate() {
            if !special.contains(&n) {
                let m = row.amplitudes[i].norm_sqr();
                rest.push((n, m));
                rest_mass += m;
            }
        }
        if rest_mass <= 0.0 {
            return Ok(0);
        }
        let u2: f64 = rng.gen::<f64>() * rest_mass;
        let mut acc = 0.0;
        for &(n, m) in &rest {
            acc += m;
            if u2 < acc {
                return Ok(n);
            }
        }
        return Ok(rest.last().unwrap().0);
    }
    // small momentum or large kick: wide exact window
    let policy = if k.abs() < 8.0 {
        TruncationPolicy {
            epsilon: 1e-6,
            m_tail: 1e-9,
            max_halfwidth: 4096,
        }
    } else {
        TruncationPolicy::sampling()
    };
    let row = kappa_row(k, v, &policy, comb)?;
    Ok(row.sample(rng.gen()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::reflection_quantities;
    use rand::Rng;

    fn comb() -> CombParams {
        CombParams::new(1.0, 260.0).unwrap()
    }

    #[test]
    fn v_zero_is_kronecker_delta() {
        let comb = comb();
        for &k in &[7.3, 20.26, 151.4] {
            let row = kappa_row(k, 0.0, &TruncationPolicy::default(), &comb).unwrap();
            assert!((row.weight(0) - 1.0).abs() < 1e-8, "k={k}");
            for (&n, a) in row.indices.iter().zip(&row.amplitudes) {
                if n != 0 {
                    assert!(a.norm() < 1e-8, "k={k}, n={n}: {}", a.norm());
                }
            }
        }
    }

    #[test]
    fn unitarity_over_random_pairs() {
        let comb = comb();
        let mut rng = crate::rng::substream(5, 1);
        for _ in 0..40 {
            let k = nudge_half_integer(10.0 + 200.0 * rng.gen::<f64>());
            let v = 4.0 * rng.gen::<f64>() - 2.0;
            let row = kappa_row(k, v, &TruncationPolicy::default(), &comb).unwrap();
            let mass = row.raw_mass();
            assert!(
                (mass - 1.0).abs() < 1e-6,
                "k={k} v={v}: mass={mass}, tail={}",
                row.tail_mass
            );
            assert!((mass + row.tail_mass - 1.0).abs() < 1e-9);
            let wsum: f64 = row.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-12);
            for &s in &row.special_set {
                assert!(row.indices.binary_search(&s).is_ok());
            }
        }
    }

    #[test]
    fn reflection_weight_asymptotics() {
        // |kappa_v(k, -n(k+v))|^2 ~ r+(k) r-(k+v) within c/(|k|(1+|beta(k+v)|))
        let comb = comb();
        let k = 150.3;
        for &dv in &[0.004f64, 0.07, 0.21] {
            let v = (151.0 / 2.0 + dv) - k;
            let kv = k + v;
            let nkv = band_coords(kv).nhalf;
            let row = kappa_row(k, v, &TruncationPolicy::default(), &comb).unwrap();
            let got = row.amplitude(-nkv).norm_sqr();
            let pred = reflection_quantities(1.0, k).r_plus * reflection_quantities(1.0, kv).r_minus;
            let beta_kv = band_coords(kv).beta.abs();
            let bound = 2.0 / (k * (1.0 + beta_kv));
            assert!(
                (got - pred).abs() <= bound,
                "dv={dv}: got={got:.3e} pred={pred:.3e} bound={bound:.3e}"
            );
        }
    }

    #[test]
    fn amplitude_error_estimate_honest() {
        // tight m-windows must agree with much wider ones within the estimate
        let comb = comb();
        let k = 60.37;
        let v = 0.83;
        let nk = band_coords(k).nhalf;
        let nkv = band_coords(k + v).nhalf;
        let eta_k = EtaTable::new(k, &comb).unwrap();
        for n in [-121i64, -120, -2, 0, 3] {
            let eta_kvn = EtaTable::new(k + v + n as f64, &comb).unwrap();
            let (a1, e1) = kappa_amplitude_tables(&eta_k, &eta_kvn, nk, nkv, n, 1e-9);
            let (a2, _) = kappa_amplitude_tables(&eta_k, &eta_kvn, nk, nkv, n, 1e-15);
            assert!(
                (a1 - a2).norm() <= (e1 + 1e-12),
                "n={n}: diff={} est={}",
                (a1 - a2).norm(),
                e1
            );
        }
    }

    #[test]
    fn sampler_matches_row_distribution() {
        let comb = comb();
        let k = 40.3;
        let v = 0.9;
        let row = kappa_row(k, v, &TruncationPolicy::default(), &comb).unwrap();
        let mut rng = crate::rng::substream(99, 3);
        let n_draws = 40_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n_draws {
            let n = sample_lattice_jump(k, v, &comb, &mut rng).unwrap();
            *counts.entry(n).or_insert(0usize) += 1;
        }
        for (&n, &c) in &counts {
            let w = row.weight(n);
            let p_hat = c as f64 / n_draws as f64;
            let se = (w.max(1e-9) * (1.0 - w) / n_draws as f64).sqrt();
            assert!(
                (p_hat - w).abs() < 6.0 * se + 2e-4,
                "n={n}: p_hat={p_hat} w={w}"
            );
        }
    }
}
