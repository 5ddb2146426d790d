//! Ensembles of independent trajectories with order-independent summaries.
//!
//! Each trajectory runs on its own counter-based substream keyed by
//! (seed, index), so results are bit-identical for a fixed seed regardless of
//! how many workers execute the batch: per-trajectory partials are collected
//! in index order and reduced sequentially.

use rayon::prelude::*;
use serde::Serialize;

use super::law::{step, ProcessLaw, TrajectoryState};
use super::tau::{TauInterval, TauSequencer};
use super::ProcessError;
use crate::bloch::CombParams;
use crate::kick::KickLaw;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, Serialize)]
pub enum Initial {
    /// point mass at k0 (nudged off the lattice)
    PointMass(f64),
    /// Gaussian density with the given mean and standard deviation
    Gaussian { mean: f64, std: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RecordPlan {
    /// accumulate the τ-interval bracket sums and ∫E^{3/2} for the
    /// quadratic-variation comparison
    pub qv_bracket: bool,
    /// accumulate the |K|-binned flip rate histogram
    pub flip_rate: bool,
    /// occupation fraction of sqrt(E) ≤ ε·t^{ρ1}: (ε, ρ1)
    pub occupation: Option<(f64, f64)>,
    /// retain the per-trajectory flip event logs (memory O(flips))
    pub flip_log: bool,
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub law: ProcessLaw,
    pub initial: Initial,
    pub t_horizon: f64,
    /// snapshot times (ascending); the horizon is appended if absent
    pub snapshots: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub record: RecordPlan,
}

/// Per-trajectory values of (K, Y, E(K)) at one snapshot time.
#[derive(Debug, Clone, Serialize)]
pub struct SnapshotStats {
    pub time: f64,
    pub k: Vec<f64>,
    pub y: Vec<f64>,
    pub energy: Vec<f64>,
}

/// Sufficient statistics of Σ_m K²(Δτ_m − |K|/ν)² in powers of 1/ν:
/// the bracket equals s_d2 − (2/ν)·s_d1 + (1/ν²)·s_d0.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct QvSums {
    pub s_d2: f64,
    pub s_d1: f64,
    pub s_d0: f64,
    pub n_terms: u64,
    /// how many intervals ended in an actual sign-flip
    pub n_flip_terms: u64,
    /// ∫₀ᵗ E(K_r)^{3/2} dr, exact over the piecewise-constant path
    pub e32_integral: f64,
}

impl QvSums {
    pub fn bracket(&self, nu: f64) -> f64 {
        self.s_d2 - 2.0 / nu * self.s_d1 + self.s_d0 / (nu * nu)
    }

    fn absorb(&mut self, iv: &TauInterval) {
        let k2 = iv.k_anchor * iv.k_anchor;
        self.s_d2 += k2 * iv.delta * iv.delta;
        self.s_d1 += k2 * iv.k_anchor.abs() * iv.delta;
        self.s_d0 += k2 * k2;
        self.n_terms += 1;
        if iv.ended_by_flip {
            self.n_flip_terms += 1;
        }
    }
}

/// |K|-binned flip statistics: log-spaced bins, per-bin occupation time and
/// confirmed flip count, summed over the ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct FlipRateHist {
    pub edges: Vec<f64>,
    pub time_in_bin: Vec<f64>,
    pub flips_in_bin: Vec<u64>,
}

impl FlipRateHist {
    fn new() -> Self {
        // 25 · 2^(i/2), i = 0..=10: covers |k| from 25 to 800
        let edges: Vec<f64> = (0..=10).map(|i| 25.0 * 2f64.powf(i as f64 / 2.0)).collect();
        let n = edges.len() - 1;
        FlipRateHist {
            edges,
            time_in_bin: vec![0.0; n],
            flips_in_bin: vec![0; n],
        }
    }

    fn bin(&self, k_abs: f64) -> Option<usize> {
        if k_abs < self.edges[0] || k_abs >= *self.edges.last().unwrap() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= k_abs) - 1)
    }

    /// Empirical flip rate in the bin holding |k|, with its Poisson SE.
    pub fn rate_at(&self, k_abs: f64) -> Option<(f64, f64)> {
        let b = self.bin(k_abs)?;
        if self.time_in_bin[b] <= 0.0 {
            return None;
        }
        let rate = self.flips_in_bin[b] as f64 / self.time_in_bin[b];
        let se = (self.flips_in_bin[b].max(1) as f64).sqrt() / self.time_in_bin[b];
        Some((rate, se))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub law: ProcessLaw,
    pub t_horizon: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub snapshots: Vec<SnapshotStats>,
    pub qv: Option<Vec<QvSums>>,
    pub occupation: Option<Vec<f64>>,
    pub flip_rate: Option<FlipRateHist>,
    pub flip_logs: Option<Vec<Vec<super::flip::FlipEvent>>>,
    pub total_events: u64,
    pub total_flips: u64,
}

struct TrajPartial {
    snaps: Vec<(f64, f64, f64)>,
    qv: QvSums,
    occupation: f64,
    flip_bins: Option<(Vec<f64>, Vec<u64>)>,
    flip_log: Vec<super::flip::FlipEvent>,
    events: u64,
    flips: u64,
}

/// Simulate n_traj independent trajectories and gather the requested records.
pub fn run_ensemble(
    config: &EnsembleConfig,
    kick: &KickLaw,
    comb: &CombParams,
) -> Result<EnsembleSummary, ProcessError> {
    if config.n_traj == 0 {
        return Err(ProcessError::Config("n_traj must be at least 1".into()));
    }
    if !(config.t_horizon > 0.0) {
        return Err(ProcessError::Config("t_horizon must be positive".into()));
    }
    config.law.validate()?;
    let mut snap_times = config.snapshots.clone();
    snap_times.retain(|&s| s > 0.0 && s <= config.t_horizon);
    snap_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if snap_times.last() != Some(&config.t_horizon) {
        snap_times.push(config.t_horizon);
    }

    let partials: Result<Vec<TrajPartial>, ProcessError> = (0..config.n_traj)
        .into_par_iter()
        .map(|i| run_one(i as u64, config, &snap_times, kick, comb))
        .collect();
    let partials = partials?;

    let nsnap = snap_times.len();
    let mut snapshots: Vec<SnapshotStats> = snap_times
        .iter()
        .map(|&time| SnapshotStats {
            time,
            k: Vec::with_capacity(config.n_traj),
            y: Vec::with_capacity(config.n_traj),
            energy: Vec::with_capacity(config.n_traj),
        })
        .collect();
    let mut qv = Vec::with_capacity(config.n_traj);
    let mut occ = Vec::with_capacity(config.n_traj);
    let mut hist = config.record.flip_rate.then(FlipRateHist::new);
    let mut logs = config
        .record
        .flip_log
        .then(|| Vec::with_capacity(config.n_traj));
    let mut total_events = 0u64;
    let mut total_flips = 0u64;
    for p in &partials {
        for s in 0..nsnap {
            snapshots[s].k.push(p.snaps[s].0);
            snapshots[s].y.push(p.snaps[s].1);
            snapshots[s].energy.push(p.snaps[s].2);
        }
        qv.push(p.qv);
        occ.push(p.occupation);
        if let (Some(h), Some((tb, fb))) = (hist.as_mut(), p.flip_bins.as_ref()) {
            for b in 0..h.time_in_bin.len() {
                h.time_in_bin[b] += tb[b];
                h.flips_in_bin[b] += fb[b];
            }
        }
        if let Some(logs) = logs.as_mut() {
            logs.push(p.flip_log.clone());
        }
        total_events += p.events;
        total_flips += p.flips;
    }

    Ok(EnsembleSummary {
        law: config.law,
        t_horizon: config.t_horizon,
        n_traj: config.n_traj,
        seed: config.seed,
        snapshots,
        qv: config.record.qv_bracket.then_some(qv),
        occupation: config.record.occupation.map(|_| occ),
        flip_rate: hist,
        flip_logs: logs,
        total_events,
        total_flips,
    })
}

fn run_one(
    index: u64,
    config: &EnsembleConfig,
    snap_times: &[f64],
    kick: &KickLaw,
    comb: &CombParams,
) -> Result<TrajPartial, ProcessError> {
    use rand::Rng;
    let mut rng = substream(config.seed, index);
    let k0 = match config.initial {
        Initial::PointMass(k0) => k0,
        Initial::Gaussian { mean, std } => {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            mean + std * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    };
    let mut state = TrajectoryState::new(k0, &config.law, comb, &mut rng);
    let mut snaps = vec![(0.0, 0.0, 0.0); snap_times.len()];
    let mut next_snap = 0usize;

    let mut seq = config
        .record
        .qv_bracket
        .then(|| TauSequencer::new(config.t_horizon, 0.0, state.k));
    let mut qv = QvSums::default();
    let mut intervals = Vec::new();

    let occ_threshold = config
        .record
        .occupation
        .map(|(eps, rho1)| eps * config.t_horizon.powf(rho1));
    let mut occ_time = 0.0;

    let hist_proto = config.record.flip_rate.then(FlipRateHist::new);
    let mut flip_bins = hist_proto
        .as_ref()
        .map(|h| (vec![0.0; h.time_in_bin.len()], vec![0u64; h.time_in_bin.len()]));
    let mut flip_log = Vec::new();

    while state.t < config.t_horizon {
        let t_prev = state.t;
        let k_prev = state.k;
        let out = step(&mut state, &config.law, kick, comb, &mut rng)?;
        let t_seg_end = state.t.min(config.t_horizon);
        let seg = t_seg_end - t_prev;

        // snapshots crossed by this inter-event segment (K was k_prev)
        while next_snap < snap_times.len() && snap_times[next_snap] <= state.t {
            let s = snap_times[next_snap];
            let y_s = state.y - k_prev * (state.t - s);
            let e_s = config.law.energy(k_prev, comb)?;
            snaps[next_snap] = (k_prev, y_s, e_s);
            next_snap += 1;
        }

        if let Some(th) = occ_threshold {
            if config.law.energy(k_prev, comb)?.sqrt() <= th {
                occ_time += seg;
            }
        }
        if config.record.qv_bracket {
            qv.e32_integral += config.law.energy(k_prev, comb)?.powf(1.5) * seg;
        }
        if let (Some(h), Some((tb, _))) = (hist_proto.as_ref(), flip_bins.as_mut()) {
            if let Some(b) = h.bin(k_prev.abs()) {
                tb[b] += seg;
            }
        }

        if state.t <= config.t_horizon {
            if let Some(seq) = seq.as_mut() {
                seq.on_event(state.t, state.k, &mut intervals);
                for iv in intervals.drain(..) {
                    qv.absorb(&iv);
                }
            }
            if let Some(f) = out.flip {
                if let (Some(h), Some((_, fb))) = (hist_proto.as_ref(), flip_bins.as_mut()) {
                    if let Some(b) = h.bin(f.k_after.abs()) {
                        fb[b] += 1;
                    }
                }
                if config.record.flip_log {
                    flip_log.push(f);
                }
            }
        }
    }

    // events that land exactly on or after the horizon do not count; Y at the
    // horizon was already captured by the snapshot logic (horizon is the last
    // snapshot time)
    Ok(TrajPartial {
        snaps,
        qv,
        occupation: occ_time / config.t_horizon,
        flip_bins,
        flip_log,
        events: state.events,
        flips: state.flips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(law: ProcessLaw, t: f64, n: usize) -> EnsembleConfig {
        EnsembleConfig {
            law,
            initial: Initial::PointMass(0.0),
            t_horizon: t,
            snapshots: vec![],
            n_traj: n,
            seed: 42,
            record: RecordPlan::default(),
        }
    }

    #[test]
    fn seed_determinism_across_worker_counts() {
        let comb = CombParams::new(1.0, 20.0).unwrap();
        let kick = KickLaw::default_laplace();
        let config = base_config(ProcessLaw::BandModel { vartheta: 0.5 }, 200.0, 64);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool2 = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let s1 = pool1.install(|| run_ensemble(&config, &kick, &comb)).unwrap();
        let s2 = pool2.install(|| run_ensemble(&config, &kick, &comb)).unwrap();
        assert_eq!(s1.total_events, s2.total_events);
        let last1 = s1.snapshots.last().unwrap();
        let last2 = s2.snapshots.last().unwrap();
        assert_eq!(last1.k, last2.k);
        assert_eq!(last1.y, last2.y);
    }

    #[test]
    fn snapshot_y_is_exact_integral() {
        // free law, k never changes sign deterministically? use one traj and
        // verify Y at horizon equals the piecewise integral by construction
        let comb = CombParams::new(1.0, 20.0).unwrap();
        let kick = KickLaw::default_laplace();
        let mut config = base_config(ProcessLaw::FreeLevy, 50.0, 1);
        config.initial = Initial::PointMass(2.0);
        config.snapshots = vec![10.0, 25.0, 50.0];
        let s = run_ensemble(&config, &kick, &comb).unwrap();
        assert_eq!(s.snapshots.len(), 3);
        // Y grows and is finite; exactness is covered by the law unit test
        for snap in &s.snapshots {
            assert!(snap.y[0].is_finite());
        }
    }

    #[test]
    fn occupation_fraction_in_unit_interval() {
        let comb = CombParams::new(1.0, 20.0).unwrap();
        let kick = KickLaw::default_laplace();
        let mut config = base_config(ProcessLaw::FreeLevy, 100.0, 8);
        config.record.occupation = Some((10.0, 0.5));
        let s = run_ensemble(&config, &kick, &comb).unwrap();
        for &f in s.occupation.as_ref().unwrap() {
            assert!((0.0..=1.0).contains(&f));
        }
        // threshold far above the path: fraction ~ 1
        let mean: f64 =
            s.occupation.as_ref().unwrap().iter().sum::<f64>() / s.n_traj as f64;
        assert!(mean > 0.95, "mean occupation {mean}");
    }
}
