//! Quantum trajectory unraveling of the Lindblad dynamics on branching pure
//! states in the extended-zone basis.
//!
//! Conditioned on one noise realization ξ = (t₁,v₁; t₂,v₂; …), the state is
//! the pure vector U(ξ)ψ with U a product of free flights e^{−iΔt·H/λ} and
//! boosts e^{iv_nX}.  In the extended-zone basis the flight is the diagonal
//! phase e^{−iΔt·E(k)/λ} and the boost scatters every branch over its lattice
//! translates with the κ amplitudes; since all branches share the offset
//! lattice k₀ + Σv_i + ℤ, the state stays a finite vector of complex
//! amplitudes over integer offsets.
//!
//! A boost is applied as two unitary basis passes through the plane-wave
//! representation (Bloch → plane waves, exact shift by v, plane waves →
//! Bloch), which is algebraically identical to convolving each branch with
//! its κ row but shares the η tables across branches.
//!
//! Averaging |amplitude|² over realizations gives the diagonal D_{λ,t}; the
//! classical reference 𝓓_t is generated by the same branching computation
//! with probabilities in place of amplitudes (the conditional law of the
//! momentum process given ξ), so both sides carry identical binning noise.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bloch::{self, band_coords, nudge_half_integer, CombParams};
use crate::kick::KickLaw;
use crate::rng::substream_tagged;

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error("branch support exceeded the cap of {cap} after truncation")]
    BranchExplosion { cap: usize },
    #[error(transparent)]
    Bloch(#[from] bloch::BlochError),
}

/// Truncation policy for the branching state.
#[derive(Debug, Clone, Copy)]
pub struct BranchPolicy {
    /// drop branches with |a|² below this after each kick
    pub weight_floor: f64,
    /// maximum number of lattice offsets kept
    pub cap: usize,
    /// padding of the offset window beyond the occupied hull per kick
    pub pad: i64,
}

impl Default for BranchPolicy {
    fn default() -> Self {
        BranchPolicy {
            weight_floor: 1e-10,
            cap: 4096,
            pad: 24,
        }
    }
}

/// Finite superposition over extended-zone momenta base + n, n ∈ ℤ.
#[derive(Debug, Clone)]
pub struct PureState {
    pub base: f64,
    pub lo: i64,
    pub amps: Vec<Complex64>,
    pub norm_deficit: f64,
}

impl PureState {
    pub fn point(k0: f64) -> Self {
        PureState {
            base: nudge_half_integer(k0),
            lo: 0,
            amps: vec![Complex64::new(1.0, 0.0)],
            norm_deficit: 0.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn momentum(&self, idx: usize) -> f64 {
        self.base + (self.lo + idx as i64) as f64
    }

    /// ⟨E⟩ = Σ|a|²E(k) over the support.
    pub fn mean_energy(&self, comb: &CombParams) -> Result<f64, LindbladError> {
        let mut e = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w > 1e-14 {
                e += w * comb.dispersion(nudge_half_integer(self.momentum(i)))?;
            }
        }
        Ok(e)
    }

    fn occupied_hull(&self, floor: f64) -> Option<(i64, i64)> {
        let mut lo = None;
        let mut hi = None;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > floor {
                let n = self.lo + i as i64;
                if lo.is_none() {
                    lo = Some(n);
                }
                hi = Some(n);
            }
        }
        Some((lo?, hi?))
    }
}

/// Free flight: multiply each branch by e^{−iΔt·E(k)/λ}.
fn phase_step(
    state: &mut PureState,
    dt: f64,
    lambda: f64,
    comb: &CombParams,
) -> Result<(), LindbladError> {
    if dt == 0.0 {
        return Ok(());
    }
    for i in 0..state.amps.len() {
        if state.amps[i].norm_sqr() < 1e-32 {
            continue;
        }
        let e = comb.dispersion(nudge_half_integer(state.momentum(i)))?;
        let phi = -dt * e / lambda;
        state.amps[i] *= Complex64::new(phi.cos(), phi.sin());
    }
    Ok(())
}

/// Boost e^{ivX} via the plane-wave passage, then truncate and renormalize.
fn kick_step(
    state: &mut PureState,
    v: f64,
    comb: &CombParams,
    policy: &BranchPolicy,
) -> Result<(), LindbladError> {
    let (occ_lo, occ_hi) = match state.occupied_hull(policy.weight_floor * 1e-3) {
        Some(h) => h,
        None => return Ok(()),
    };
    // the plane-wave image of a branch at offset m has mass near m and near
    // its reflection -n(base+m)+m ~ -2(base+m)+m; cover both sides plus pad
    let mirror = |n: i64| -> i64 { n - band_coords(state.base + n as f64).nhalf };
    let m1 = mirror(occ_lo);
    let m2 = mirror(occ_hi);
    let j_lo = occ_lo.min(occ_hi).min(m1.min(m2)) - policy.pad;
    let j_hi = occ_lo.max(occ_hi).max(m1.max(m2)) + policy.pad;

    // pass 1: Bloch -> plane waves at the old base
    let width = (j_hi - j_lo + 1) as usize;
    let mut plane = vec![Complex64::new(0.0, 0.0); width];
    for (i, a) in state.amps.iter().enumerate() {
        if a.norm_sqr() < policy.weight_floor * 1e-6 {
            continue;
        }
        let m = state.lo + i as i64;
        let k = nudge_half_integer(state.base + m as f64);
        let table = crate::bloch::EtaTable::new(k, comb)?;
        for (jj, p) in plane.iter_mut().enumerate() {
            let j = j_lo + jj as i64;
            *p += table.eta(j - m) * a;
        }
    }

    // exact shift: plane-wave amplitudes keep their offsets over the new base
    // (nudged off the lattice, where the kets are discontinuous)
    let new_base = nudge_half_integer(state.base + v);

    // pass 2: plane waves -> Bloch at the new base; ⟨ψ̃_{p+n}, ψ_p⟩ = η̄(p+n, −n)
    let mut amps = vec![Complex64::new(0.0, 0.0); width];
    for (nn, out) in amps.iter_mut().enumerate() {
        let n = j_lo + nn as i64;
        let k = nudge_half_integer(new_base + n as f64);
        let table = crate::bloch::EtaTable::new(k, comb)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (jj, p) in plane.iter().enumerate() {
            if p.norm_sqr() < 1e-32 {
                continue;
            }
            let j = j_lo + jj as i64;
            acc += table.eta(j - n).conj() * p;
        }
        *out = acc;
    }

    // truncate: drop sub-floor branches, fold the discarded mass into the
    // deficit, renormalize to unit norm
    let mut kept_lo = None;
    let mut kept_hi = 0usize;
    let mut kept_mass = 0.0;
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    for (i, a) in amps.iter_mut().enumerate() {
        let w = a.norm_sqr();
        if w >= policy.weight_floor {
            if kept_lo.is_none() {
                kept_lo = Some(i);
            }
            kept_hi = i;
            kept_mass += w;
        } else {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    let kept_lo = kept_lo.ok_or(LindbladError::BranchExplosion { cap: policy.cap })?;
    if kept_hi - kept_lo + 1 > policy.cap {
        return Err(LindbladError::BranchExplosion { cap: policy.cap });
    }
    state.norm_deficit += (1.0 - state.norm_deficit) * (total - kept_mass).max(0.0);
    let scale = 1.0 / kept_mass.sqrt();
    state.base = new_base;
    state.lo = j_lo + kept_lo as i64;
    state.amps = amps[kept_lo..=kept_hi]
        .iter()
        .map(|a| a * scale)
        .collect();
    Ok(())
}

/// Evolve a pure state over `duration` under time-ordered kicks.
pub fn evolve_pure_state(
    mut state: PureState,
    duration: f64,
    kicks: &[(f64, f64)],
    lambda: f64,
    comb: &CombParams,
    policy: &BranchPolicy,
) -> Result<PureState, LindbladError> {
    let mut t = 0.0;
    for &(tk, v) in kicks {
        debug_assert!(tk >= t && tk <= duration, "kicks must be time-ordered");
        phase_step(&mut state, tk - t, lambda, comb)?;
        kick_step(&mut state, v, comb, policy)?;
        t = tk;
    }
    phase_step(&mut state, duration - t, lambda, comb)?;
    Ok(state)
}

/// Reference implementation of one kick as an explicit per-branch κ
/// convolution; used by tests to pin the fast passage.
pub fn kick_by_kappa_rows(
    state: &PureState,
    v: f64,
    window: i64,
    comb: &CombParams,
) -> Result<PureState, LindbladError> {
    let new_base = nudge_half_integer(state.base + v);
    let lo = state.lo - window;
    let hi = state.lo + state.amps.len() as i64 - 1 + window;
    let width = (hi - lo + 1) as usize;
    let mut amps = vec![Complex64::new(0.0, 0.0); width];
    for (i, a) in state.amps.iter().enumerate() {
        if a.norm_sqr() < 1e-30 {
            continue;
        }
        let m = state.lo + i as i64;
        let k = nudge_half_integer(state.base + m as f64);
        for n in -window..=window {
            let amp = bloch::kappa_amplitude(k, v, n, 1e-13, comb)?;
            let target = m + n;
            if target >= lo && target <= hi {
                amps[(target - lo) as usize] += amp * a;
            }
        }
    }
    Ok(PureState {
        base: new_base,
        lo,
        amps,
        norm_deficit: state.norm_deficit,
    })
}

/// Histogram of squared-amplitude mass per momentum bin, averaged over states.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalHistogram {
    pub lo: f64,
    pub bin_width: f64,
    pub mass: Vec<f64>,
}

impl DiagonalHistogram {
    pub fn new(lo: f64, hi: f64, bin_width: f64) -> Self {
        let n = ((hi - lo) / bin_width).ceil() as usize;
        DiagonalHistogram {
            lo,
            bin_width,
            mass: vec![0.0; n + 1], // last slot is overflow
        }
    }

    pub fn deposit(&mut self, k: f64, w: f64) {
        let idx = (k - self.lo) / self.bin_width;
        if idx >= 0.0 && (idx as usize) < self.mass.len() - 1 {
            self.mass[idx as usize] += w;
        } else {
            *self.mass.last_mut().unwrap() += w;
        }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn scale(&mut self, s: f64) {
        for m in &mut self.mass {
            *m *= s;
        }
    }

    pub fn l1_distance(&self, other: &DiagonalHistogram) -> f64 {
        assert_eq!(self.mass.len(), other.mass.len());
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Average the diagonal of an ensemble of final pure states on a common grid.
pub fn diagonal_histogram(
    states: &[PureState],
    lo: f64,
    hi: f64,
    bin_width: f64,
) -> DiagonalHistogram {
    let mut h = DiagonalHistogram::new(lo, hi, bin_width);
    let w_state = 1.0 / states.len() as f64;
    for s in states {
        let rescale = 1.0 - s.norm_deficit;
        for (i, a) in s.amps.iter().enumerate() {
            let w = a.norm_sqr() * rescale * w_state;
            if w > 0.0 {
                h.deposit(s.momentum(i), w);
            }
        }
    }
    h
}

/// Classical conditional reference: evolve branch probabilities under the
/// same noise-realization structure (lattice branches convolved with |κ|²).
fn classical_conditional(
    k0: f64,
    kicks: &[(f64, f64)],
    comb: &CombParams,
    window: i64,
) -> Result<(f64, i64, Vec<f64>, f64), LindbladError> {
    let mut base = nudge_half_integer(k0);
    let mut lo = 0i64;
    let mut probs = vec![1.0f64];
    let mut deficit = 0.0;
    for &(_, v) in kicks {
        // occupied hull and its mirror, as in the quantum pass
        let mut occ_lo = i64::MAX;
        let mut occ_hi = i64::MIN;
        for (i, &p) in probs.iter().enumerate() {
            if p > 1e-9 {
                let n = lo + i as i64;
                occ_lo = occ_lo.min(n);
                occ_hi = occ_hi.max(n);
            }
        }
        if occ_lo > occ_hi {
            break;
        }
        let mirror = |n: i64| -> i64 { n - band_coords(base + n as f64).nhalf };
        let t_lo = occ_lo.min(mirror(occ_lo).min(mirror(occ_hi))) - window;
        let t_hi = occ_hi.max(mirror(occ_lo).max(mirror(occ_hi))) + window;
        let width = (t_hi - t_lo + 1) as usize;
        let mut next = vec![0.0f64; width];
        for (i, &p) in probs.iter().enumerate() {
            if p <= 1e-9 {
                continue;
            }
            let m = lo + i as i64;
            let k = nudge_half_integer(base + m as f64);
            let src = bloch::KappaSource::new(k, comb)?;
            // per-branch support: window around 0 plus the special jumps
            let mut idx: Vec<i64> = (-window..=window).collect();
            for &s in &bloch::special_set(k, v) {
                for j in (s - 8)..=(s + 8) {
                    idx.push(j);
                }
            }
            idx.sort_unstable();
            idx.dedup();
            for &n in &idx {
                let target = m + n;
                if target < t_lo || target > t_hi {
                    continue;
                }
                let w = src.amplitude(v, n, 3e-7)?.norm_sqr();
                if w > 1e-12 {
                    next[(target - t_lo) as usize] += p * w;
                }
            }
        }
        let total: f64 = next.iter().sum();
        deficit += (1.0 - deficit) * (1.0 - total).max(0.0);
        let scale = 1.0 / total;
        for p in &mut next {
            *p *= scale;
        }
        base = nudge_half_integer(base + v);
        lo = t_lo;
        probs = next;
    }
    Ok((base, lo, probs, deficit))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SemiclassicalPoint {
    pub lambda: f64,
    pub l1_distance: f64,
    pub mc_se: f64,
}

/// Configuration shared by the quantum and classical sides of the comparison.
#[derive(Debug, Clone)]
pub struct SemiclassicalConfig {
    pub k0: f64,
    pub t: f64,
    pub n_realizations: usize,
    pub seed: u64,
    pub bin_width: f64,
    pub policy: BranchPolicy,
    /// share each realized kick sequence between the quantum and classical
    /// sides.  The lumpy transmitted-branch noise then cancels in the
    /// histogram difference, leaving the coherence signal; both estimators
    /// target the same ensemble quantity ‖D_{λ,t} − 𝓓_t‖₁, but with
    /// independent streams the L¹ noise floor at desk-scale realization
    /// counts (~√(bins/n)) swamps the percent-level signal.
    pub coupled: bool,
}

/// Full comparison output: distances per λ plus the histograms themselves
/// (one classical histogram per λ; they share realizations when coupled).
#[derive(Debug, Clone, Serialize)]
pub struct SemiclassicalResult {
    pub points: Vec<SemiclassicalPoint>,
    pub classical: Vec<DiagonalHistogram>,
    pub quantum: Vec<DiagonalHistogram>,
}

/// For each λ, the L¹ distance between the quantum diagonal and the classical
/// master-equation histogram, with matched realization counts and bins.
pub fn semiclassical_compare(
    lambdas: &[f64],
    config: &SemiclassicalConfig,
    kick: &KickLaw,
    comb: &CombParams,
) -> Result<SemiclassicalResult, LindbladError> {
    let spread = 6.0 * (kick.sigma * config.t).sqrt() + 12.0;
    let lo = -(config.k0.abs() + spread);
    let hi = config.k0.abs() + spread;

    let blocks = 16.min(config.n_realizations);
    let per_block = config.n_realizations.div_ceil(blocks);
    let block_of = |i: usize| (i / per_block).min(blocks - 1);

    // per-block classical histograms under a given stream tag
    let classical_blocks = |tag: u64| -> Result<Vec<DiagonalHistogram>, LindbladError> {
        let rows: Result<Vec<_>, LindbladError> = (0..config.n_realizations)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream_tagged(config.seed, tag, i as u64);
                let kicks = draw_kicks(config.t, kick, &mut rng);
                classical_conditional(config.k0, &kicks, comb, 14)
            })
            .collect();
        let rows = rows?;
        let mut hs = vec![DiagonalHistogram::new(lo, hi, config.bin_width); blocks];
        let w_real = 1.0 / config.n_realizations as f64;
        for (r, (base, clo, probs, deficit)) in rows.iter().enumerate() {
            let h = &mut hs[block_of(r)];
            for (i, &p) in probs.iter().enumerate() {
                h.deposit(base + (clo + i as i64) as f64, p * (1.0 - deficit) * w_real);
            }
        }
        Ok(hs)
    };

    // independent mode: one classical ensemble on its own stream serves all λ
    let shared_classical = if config.coupled {
        None
    } else {
        Some(classical_blocks(0xC1A5)?)
    };

    let sum_hists = |hs: &[DiagonalHistogram]| -> DiagonalHistogram {
        let mut total = DiagonalHistogram::new(lo, hi, config.bin_width);
        for h in hs {
            for (b, &m) in h.mass.iter().enumerate() {
                total.mass[b] += m;
            }
        }
        total
    };

    let mut out = Vec::with_capacity(lambdas.len());
    let mut quantum_hists = Vec::with_capacity(lambdas.len());
    let mut classical_hists = Vec::with_capacity(lambdas.len());
    for (li, &lambda) in lambdas.iter().enumerate() {
        let states: Result<Vec<PureState>, LindbladError> = (0..config.n_realizations)
            .into_par_iter()
            .map(|i| {
                let mut rng =
                    substream_tagged(config.seed, 0x0BB1 + li as u64, i as u64);
                let kicks = draw_kicks(config.t, kick, &mut rng);
                evolve_pure_state(
                    PureState::point(config.k0),
                    config.t,
                    &kicks,
                    lambda,
                    comb,
                    &config.policy,
                )
            })
            .collect();
        let states = states?;
        let mut q_blocks = vec![DiagonalHistogram::new(lo, hi, config.bin_width); blocks];
        let w_real = 1.0 / config.n_realizations as f64;
        for (r, s) in states.iter().enumerate() {
            let rescale = (1.0 - s.norm_deficit) * w_real;
            let h = &mut q_blocks[block_of(r)];
            for (i, a) in s.amps.iter().enumerate() {
                let w = a.norm_sqr() * rescale;
                if w > 0.0 {
                    h.deposit(s.momentum(i), w);
                }
            }
        }
        // coupled mode: the classical side replays this λ's kick sequences
        let c_blocks = match &shared_classical {
            Some(hs) => hs.clone(),
            None => classical_blocks(0x0BB1 + li as u64)?,
        };
        let h_quantum = sum_hists(&q_blocks);
        let h_classical = sum_hists(&c_blocks);
        let l1 = h_quantum.l1_distance(&h_classical);

        // leave-one-block-out jackknife on the paired histograms
        let rescale = blocks as f64 / (blocks as f64 - 1.0);
        let mut loo = Vec::with_capacity(blocks);
        for b in 0..blocks {
            let mut dq = h_quantum.clone();
            let mut dc = h_classical.clone();
            for m in 0..dq.mass.len() {
                dq.mass[m] -= q_blocks[b].mass[m];
                dc.mass[m] -= c_blocks[b].mass[m];
            }
            dq.scale(rescale);
            dc.scale(rescale);
            loo.push(dq.l1_distance(&dc));
        }
        let mean_loo = loo.iter().sum::<f64>() / blocks as f64;
        let se_jack = ((blocks as f64 - 1.0) / blocks as f64
            * loo.iter().map(|d| (d - mean_loo).powi(2)).sum::<f64>())
        .sqrt();
        out.push(SemiclassicalPoint {
            lambda,
            l1_distance: l1,
            mc_se: se_jack,
        });
        quantum_hists.push(h_quantum);
        classical_hists.push(h_classical);
    }
    Ok(SemiclassicalResult {
        points: out,
        classical: classical_hists,
        quantum: quantum_hists,
    })
}

/// Poisson kick times on [0, t] with the law's rate, with j/𝓡 increments.
pub fn draw_kicks<R: rand::Rng>(t: f64, kick: &KickLaw, rng: &mut R) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut s = 0.0;
    loop {
        s += -(1.0 - rng.gen::<f64>()).ln() / kick.rate;
        if s > t {
            return out;
        }
        out.push((s, kick.sample(rng)));
    }
}
