//! The acceptance suite: every verification criterion as an executable check
//! with its tolerance pinned, returning structured pass/fail results.
//!
//! Checks use fixed seeds so failures reproduce exactly.

use rayon::prelude::*;

use crate::bloch::{
    band_coords, kappa_oracle, kappa_row, nudge_half_integer, reflection_quantities,
    special_set, CombParams, TruncationPolicy,
};
use crate::kick::KickLaw;
use crate::lindblad::{semiclassical_compare, BranchPolicy, SemiclassicalConfig};
use crate::process::{
    detect_sign_flips, detect_sign_flips_by_rescan, reflection_trial, run_ensemble,
    EnsembleConfig, ExitReason, Initial, ProcessLaw, RecordPlan,
};
use crate::rates::{escape_rate_quadrature, TorusKernel};
use crate::report::{CheckResult, Report};
use crate::rng::substream;
use crate::stats::{
    brownian_targets, ks_statistic, ks_two_sample, mean_and_se, scaling_exponent,
    variance_with_jackknife,
};

const ALPHA: f64 = 1.0;

fn default_kick() -> KickLaw {
    KickLaw::default_laplace()
}

/// 1. Spectral correctness: Krönig-Penney residual ≤ 1e-12 on a 10⁴ grid,
///    |𝐪(k) − k| ≤ α/(π|k|) for |k| ∈ [10, 500], g₁₀₀ within 2% of α/π.
pub fn criterion_spectral(seed: u64) -> Vec<CheckResult> {
    let comb = CombParams::new(ALPHA, 505.0).expect("comb build");
    let mut max_resid = 0.0f64;
    let mut max_ratio = 0.0f64;
    let n = 10_000;
    for i in 0..n {
        let k = nudge_half_integer(0.05 + 500.0 * (i as f64 + 0.5) / n as f64);
        let q = comb.quasimomentum(k).expect("solver");
        max_resid = max_resid.max(comb.kp_residual(q, k).abs());
        if k >= 10.0 {
            max_ratio = max_ratio.max((q - k).abs() * std::f64::consts::PI * k / ALPHA);
        }
    }
    let g100 = comb.band_gap(100).expect("gap");
    let target = ALPHA / std::f64::consts::PI;
    vec![
        CheckResult::below("1a kp residual on 1e4-grid", max_resid, 1e-12, n, seed),
        CheckResult::below(
            "1b |q-k| vs alpha/(pi k) bound, |k| in [10,500]",
            max_ratio,
            1.0,
            n,
            seed,
        ),
        CheckResult::near(
            "1c band gap g_100 vs alpha/pi (2%)",
            g100,
            target,
            0.02 * target,
            1,
            seed,
        ),
    ]
}

/// 2. Coefficient unitarity and series-vs-quadrature agreement over 100
///    random (k, v, n ∈ I(k,v)).
pub fn criterion_kappa_oracle(seed: u64) -> Vec<CheckResult> {
    use rand::Rng;
    let comb = CombParams::new(ALPHA, 80.0).expect("comb build");
    let mut rng = substream(seed, 0);
    let mut cases = Vec::new();
    for _ in 0..100 {
        let k = nudge_half_integer(6.0 + 54.0 * rng.gen::<f64>());
        let v = 3.0 * rng.gen::<f64>() - 1.5;
        let special = special_set(k, v);
        let n = special[(rng.gen::<u64>() % special.len() as u64) as usize];
        cases.push((k, v, n));
    }
    let results: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|&(k, v, n)| {
            let row = kappa_row(k, v, &TruncationPolicy::default(), &comb).expect("row");
            let unit_dev = (row.raw_mass() - 1.0).abs();
            let series = row.amplitude(n).norm();
            let oracle = kappa_oracle(k, v, n, &comb).expect("oracle").norm();
            (unit_dev, (series - oracle).abs())
        })
        .collect();
    let max_unit = results.iter().fold(0.0f64, |a, r| a.max(r.0));
    let max_dev = results.iter().fold(0.0f64, |a, r| a.max(r.1));
    vec![
        CheckResult::below("2a kappa row unitarity (100 pairs)", max_unit, 1e-6, 100, seed),
        CheckResult::below(
            "2b series vs quadrature |kappa| (100 triples)",
            max_dev,
            1e-6,
            100,
            seed,
        ),
    ]
}

/// 3. BadTerms decay: k²·Σ_{n∉I}|κ|² shows no growth over doubling k
///    (log-log slope ≤ 0.1) and the reflection-weight approximation error
///    scales like 1/k (fitted slope −1 ± 0.2).
pub fn criterion_badterms(seed: u64) -> Vec<CheckResult> {
    use rand::Rng;
    let comb = CombParams::new(ALPHA, 420.0).expect("comb build");
    let ks = [20.0, 40.0, 80.0, 160.0, 320.0];
    let strict = TruncationPolicy {
        epsilon: 1e-6,
        m_tail: 1e-13,
        max_halfwidth: 4096,
    };
    let mut rng = substream(seed, 1);

    // part 1: mass outside the special set, scaled by k^2
    let mut part1 = Vec::new();
    for &k0 in &ks {
        let mut acc = 0.0;
        let reps = 12;
        for _ in 0..reps {
            let k = nudge_half_integer(k0 + rng.gen::<f64>() - 0.5);
            let v = (0.5 * k0) * (rng.gen::<f64>() - 0.5);
            let row = kappa_row(k, v, &strict, &comb).expect("row");
            let special = special_set(k, v);
            let mut outside = row.tail_mass;
            for (i, &n) in row.indices.iter().enumerate() {
                if !special.contains(&n) {
                    outside += row.amplitudes[i].norm_sqr();
                }
            }
            acc += k * k * outside;
        }
        part1.push(acc / 12.0);
    }
    let xs: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let slope1 = ols_slope(&xs, &part1.iter().map(|p| p.ln()).collect::<Vec<_>>());

    // part 3: the amplitude-level approximation error
    // |κ_v(k, −𝐧(k+v)) − S((k+v)Θ(k+v))·𝐫₊^{1/2}(k)𝐫₋^{1/2}(k+v)| at pinned
    // β(k+v); the leading remainder of the two-wave reduction is Θ(1/k)
    let mut part3 = Vec::new();
    for &k0 in &ks {
        let mut acc = 0.0;
        let mut cnt = 0;
        for &beta in &[0.25, 0.5, 1.0, 2.0] {
            for rep in 0..3 {
                let k = nudge_half_integer(k0 + 0.13 + 0.11 * rep as f64);
                // land k+v near the half-integer m/2 with offset 2beta/m
                let m = (2.4 * k0).round() as i64;
                let target = m as f64 / 2.0 + 2.0 * beta / m as f64;
                let v = target - k;
                let kv = k + v;
                let bc_kv = band_coords(kv);
                if bc_kv.nhalf == band_coords(k).nhalf {
                    continue;
                }
                let row = kappa_row(k, v, &strict, &comb).expect("row");
                let got = row.amplitude(-bc_kv.nhalf);
                // leading factorization: conj(η(p, −𝐧(p)))·η(k, 0) with the
                // reflected momentum p = k+v−𝐧(k+v), whose own-band sign
                // S(p·Θ(p)) carries the amplitude's sign
                let p = kv - bc_kv.nhalf as f64;
                let sign = (p * band_coords(p).theta).signum();
                let pred = sign
                    * (reflection_quantities(ALPHA, k).r_plus
                        * reflection_quantities(ALPHA, kv).r_minus)
                        .sqrt();
                acc += (got - num_complex::Complex64::new(pred, 0.0)).norm();
                cnt += 1;
            }
        }
        part3.push(acc / cnt as f64);
    }
    let slope3 = ols_slope(&xs, &part3.iter().map(|p| p.ln()).collect::<Vec<_>>());

    vec![
        CheckResult::below(
            "3a k^2 sum_{n not in I}|kappa|^2 log-log slope",
            slope1,
            0.1,
            60,
            seed,
        ),
        CheckResult::near(
            "3b reflection-weight error ~ 1/k (slope)",
            slope3,
            -1.0,
            0.2,
            60,
            seed,
        ),
    ]
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xb = xs.iter().sum::<f64>() / n;
    let yb = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xb) * (y - yb)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xb).powi(2)).sum();
    sxy / sxx
}

/// 4. Exact-law energy drift: mean E(K_t) − E(K₀) = σt within 3 SE at t = 50
///    over 10⁵ trajectories.
pub fn criterion_energy_drift(seed: u64) -> Vec<CheckResult> {
    let comb = CombParams::new(ALPHA, 140.0).expect("comb build");
    let kick = default_kick();
    let k0 = 40.3;
    let t = 50.0;
    let config = EnsembleConfig {
        law: ProcessLaw::Exact,
        initial: Initial::PointMass(k0),
        t_horizon: t,
        snapshots: vec![],
        n_traj: 100_000,
        seed,
        record: RecordPlan::default(),
    };
    let summary = run_ensemble(&config, &kick, &comb).expect("ensemble");
    let e0 = comb.dispersion(nudge_half_integer(k0)).expect("E0");
    let snap = summary.snapshots.last().unwrap();
    let (mean_e, se_e) = mean_and_se(&snap.energy);
    let drift = mean_e - e0;
    vec![CheckResult::near(
        "4 exact-law energy drift E(K_t)-E(K_0) vs sigma t (3 SE)",
        drift,
        kick.sigma * t,
        3.0 * se_e,
        config.n_traj as u64,
        seed,
    )
    .with_detail(format!("se={se_e:.4}"))]
}

/// 5. Escape-rate constancy: ∫J(·,k) = 𝓡 ± 1e-4 at three momenta.
pub fn criterion_escape_rate(seed: u64) -> Vec<CheckResult> {
    let comb = CombParams::new(ALPHA, 80.0).expect("comb build");
    let kick = default_kick();
    [10.2, 33.3, 50.7]
        .par_iter()
        .map(|&k| {
            let est = escape_rate_quadrature(k, &kick, &comb).expect("quadrature");
            CheckResult::near(
                &format!("5 escape rate at k={k}"),
                est,
                kick.rate,
                1e-4,
                1,
                seed,
            )
        })
        .collect()
}

struct TrialBatch {
    taus: Vec<f64>,
    exits: u64,
}

fn run_trials(
    k0: f64,
    law: ProcessLaw,
    n: usize,
    seed: u64,
    kick: &KickLaw,
    comb: &CombParams,
) -> TrialBatch {
    let outs: Vec<_> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            reflection_trial(k0, &law, kick, comb, &mut rng, 400_000).expect("trial")
        })
        .collect();
    let mut taus: Vec<f64> = outs.iter().map(|o| o.tau).collect();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    TrialBatch {
        taus,
        exits: outs
            .iter()
            .filter(|o| o.reason == ExitReason::BandExit)
            .count() as u64,
    }
}

/// 6. Reflection-time law at |k0| = 200 with 2·10⁴ trials: τ·ν/|k0| is a unit
///    exponential (KS ≤ 0.05), the mean matches 1/ν within 3 SE, and the
///    deviations shrink from |k0| = 50.  Run for the band model and for the
///    exact law, with ν = 𝓡α.
pub fn criterion_reflection_law(seed: u64) -> Vec<CheckResult> {
    let kick = default_kick();
    let nu = kick.rate * ALPHA;
    let exp_cdf = |x: f64| 1.0 - (-x).exp();
    let mut out = Vec::new();
    for (law, tag, comb_kmax) in [
        (ProcessLaw::BandModel { vartheta: 0.5 }, "band", 80.0),
        (ProcessLaw::Exact, "exact", 340.0),
    ] {
        let comb = CombParams::new(ALPHA, comb_kmax).expect("comb build");
        let n = 20_000;
        let b200 = run_trials(200.3, law, n, seed ^ 0x6A09, &kick, &comb);
        let b50 = run_trials(50.3, law, n, seed ^ 0xBB67, &kick, &comb);
        let scaled: Vec<f64> = b200.taus.iter().map(|t| t * nu / 200.3).collect();
        let ks200 = ks_statistic(&scaled, exp_cdf);
        let (m200, se200) = mean_and_se(&scaled);
        let scaled50: Vec<f64> = b50.taus.iter().map(|t| t * nu / 50.3).collect();
        let (m50, _) = mean_and_se(&scaled50);
        let dev200 = (m200 - 1.0).abs();
        let dev50 = (m50 - 1.0).abs();
        // diagnostic: the same statistics against the rate the exact law
        // actually realizes (nu/4; see the reflection-weight normalization)
        let rescaled: Vec<f64> = scaled.iter().map(|t| t * 0.25).collect();
        let ks_eff = ks_statistic(&rescaled, exp_cdf);
        out.push(
            CheckResult::below(
                &format!("6a [{tag}] KS(tau nu/|k0| vs Exp(1)) at |k0|=200"),
                ks200,
                0.05,
                n as u64,
                seed,
            )
            .with_detail(format!(
                "band exits: {}; at nu_eff=nu/4: KS={ks_eff:.4}, mean={:.4}",
                b200.exits,
                0.25 * m200
            )),
        );
        out.push(
            CheckResult::near(
                &format!("6b [{tag}] E[tau/|k0|] nu at |k0|=200 (3 SE)"),
                m200,
                1.0,
                3.0 * se200,
                n as u64,
                seed,
            )
            .with_detail(format!("se={se200:.4}")),
        );
        out.push(
            CheckResult::below(
                &format!("6c [{tag}] deviation decreases from |k0|=50 to 200"),
                dev200,
                dev50,
                (2 * n) as u64,
                seed,
            )
            .with_detail(format!("dev50={dev50:.4} dev200={dev200:.4}")),
        );
    }
    out
}

struct ScalingRun {
    horizons: Vec<f64>,
    variances: Vec<f64>,
    se: Vec<f64>,
    last_snapshot_k: Vec<f64>,
}

fn scaling_run(law: ProcessLaw, seed: u64, kick: &KickLaw, comb: &CombParams) -> ScalingRun {
    let horizons = vec![1e3, 3e3, 1e4, 3e4, 1e5];
    let config = EnsembleConfig {
        law,
        initial: Initial::PointMass(0.0),
        t_horizon: 1e5,
        snapshots: horizons.clone(),
        n_traj: 10_000,
        seed,
        record: RecordPlan::default(),
    };
    let summary = run_ensemble(&config, kick, comb).expect("ensemble");
    let mut variances = Vec::new();
    let mut se = Vec::new();
    for snap in &summary.snapshots {
        let (v, s) = variance_with_jackknife(&snap.y, 20);
        variances.push(v);
        se.push(s);
    }
    let last = summary.snapshots.last().unwrap();
    ScalingRun {
        horizons,
        variances,
        se,
        last_snapshot_k: last.k.clone(),
    }
}

/// 7. Anomalous scaling of Var(Y_t): slope 2.5 ± 0.1 for the ϑ = ½ band
///    model, 3.0 ± 0.1 for the free walk, 2.8 ± 0.12 for ϑ = 0.8; and the
///    normalized variance matches the Brownian-limit constant within 15%.
pub fn criterion_scaling(seed: u64) -> Vec<CheckResult> {
    let comb = CombParams::new(ALPHA, 30.0).expect("comb build");
    let kick = default_kick();
    let nu = kick.rate * ALPHA;
    let targets = brownian_targets();
    let mut out = Vec::new();

    let band = scaling_run(ProcessLaw::BandModel { vartheta: 0.5 }, seed ^ 0x01, &kick, &comb);
    let fit = scaling_exponent(&band.horizons, &band.variances, &band.se).expect("fit");
    out.push(
        CheckResult::near("7a Var(Y_t) slope, band model theta=1/2", fit.exponent, 2.5, 0.1, 10_000, seed)
            .with_detail(format!("r2={:.5}", fit.r_squared)),
    );
    let var_t = band.variances.last().unwrap();
    let se_t = band.se.last().unwrap();
    let norm = kick.sigma.powf(-1.5) * nu * 1e5f64.powf(-2.5);
    out.push(
        CheckResult::near(
            "7b normalized Var(sigma^-3/4 nu^1/2 t^-5/4 Y_t) at t=1e5 (15%)",
            var_t * norm,
            targets.var_target,
            0.15 * targets.var_target,
            10_000,
            seed,
        )
        .with_detail(format!("mc se={:.4}", se_t * norm)),
    );

    let free = scaling_run(ProcessLaw::FreeLevy, seed ^ 0x02, &kick, &comb);
    let fit = scaling_exponent(&free.horizons, &free.variances, &free.se).expect("fit");
    out.push(CheckResult::near(
        "7c Var(Y_t) slope, free Levy walk",
        fit.exponent,
        3.0,
        0.1,
        10_000,
        seed,
    ));

    let band08 = scaling_run(ProcessLaw::BandModel { vartheta: 0.8 }, seed ^ 0x03, &kick, &comb);
    let fit = scaling_exponent(&band08.horizons, &band08.variances, &band08.se).expect("fit");
    out.push(CheckResult::near(
        "7d Var(Y_t) slope, band model theta=0.8",
        fit.exponent,
        2.8,
        0.12,
        10_000,
        seed,
    ));
    out
}

/// 8. |K| Brownian marginal at t = 1e5 and the |K′| = |Lévy| identity.
pub fn criterion_brownian_marginal(seed: u64) -> Vec<CheckResult> {
    let comb = CombParams::new(ALPHA, 30.0).expect("comb build");
    let kick = default_kick();
    let targets = brownian_targets();
    let band = scaling_run(ProcessLaw::BandModel { vartheta: 0.5 }, seed ^ 0x04, &kick, &comb);
    let absk: Vec<f64> = band.last_snapshot_k.iter().map(|k| k.abs()).collect();
    let (m, se) = mean_and_se(&absk);
    let scaled = m / (kick.sigma * 1e5).sqrt();
    let mut out = vec![CheckResult::near(
        "8a E|K_t|/sqrt(sigma t) vs sqrt(2/pi) at t=1e5 (3%)",
        scaled,
        targets.e_abs_z,
        0.03 * targets.e_abs_z,
        10_000,
        seed,
    )
    .with_detail(format!("mc se={:.4}", se / (kick.sigma * 1e5).sqrt()))];

    // |K'_t| for the theta=1/2 band model has the law of |Levy_t|
    let t_id = 1e3;
    let run = |law: ProcessLaw, s: u64| -> Vec<f64> {
        let config = EnsembleConfig {
            law,
            initial: Initial::PointMass(0.0),
            t_horizon: t_id,
            snapshots: vec![],
            n_traj: 10_000,
            seed: s,
            record: RecordPlan::default(),
        };
        let summary = run_ensemble(&config, &kick, &comb).expect("ensemble");
        let mut v: Vec<f64> = summary.snapshots.last().unwrap().k.iter().map(|k| k.abs()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let a = run(ProcessLaw::BandModel { vartheta: 0.5 }, seed ^ 0x05);
    let b = run(ProcessLaw::FreeLevy, seed ^ 0x06);
    let d = ks_two_sample(&a, &b);
    out.push(CheckResult::below(
        "8b KS(|K'_t| vs |Levy_t|), band model theta=1/2",
        d,
        0.02,
        20_000,
        seed,
    ));
    out
}

/// 9. Semi-classical limit: L¹(D_{λ,t}, 𝓓_t) strictly decreasing over
///    λ ∈ {0.2, 0.1, 0.05} with halving ratios in [0.35, 0.75].
pub fn criterion_semiclassical(seed: u64) -> Vec<CheckResult> {
    let comb = CombParams::new(ALPHA, 80.0).expect("comb build");
    let kick = default_kick();
    let config = SemiclassicalConfig {
        k0: 20.3,
        t: 5.0,
        n_realizations: 5_000,
        seed,
        bin_width: 0.05,
        policy: BranchPolicy::default(),
        // coupled realizations: at 5e3 realizations the independent-stream
        // L1 noise floor (~0.3) swamps the percent-level coherence signal
        coupled: true,
    };
    let lambdas = [0.2, 0.1, 0.05];
    let result = semiclassical_compare(&lambdas, &config, &kick, &comb).expect("compare");
    let pts = &result.points;
    let d: Vec<f64> = pts.iter().map(|p| p.l1_distance).collect();
    let mut out = vec![CheckResult::below(
        "9a L1 distance strictly decreasing in lambda (coupled streams)",
        if d[0] > d[1] && d[1] > d[2] { 0.0 } else { 1.0 },
        0.5,
        5_000,
        seed,
    )
    .with_detail(format!("d={:.4}/{:.4}/{:.4}", d[0], d[1], d[2]))];
    for (i, name) in [(0, "9b"), (1, "9c")] {
        let ratio = d[i + 1] / d[i];
        out.push(
            CheckResult::near(
                &format!(
                    "{name} halving ratio d({})/d({}) in [0.35, 0.75]",
                    lambdas[i + 1],
                    lambdas[i]
                ),
                ratio,
                0.55,
                0.2,
                5_000,
                seed,
            )
            .with_detail(format!(
                "d={:.4}±{:.4} vs {:.4}±{:.4}",
                d[i + 1],
                pts[i + 1].mc_se,
                d[i],
                pts[i].mc_se
            )),
        );
    }
    out
}

/// 10. Comb-free Gaussian limit of the characteristic function.
pub fn criterion_free_gaussian(seed: u64) -> Vec<CheckResult> {
    let kick = default_kick();
    let grid: Vec<f64> = (0..=24).map(|i| -3.0 + 6.0 * i as f64 / 24.0).collect();
    let d6 = crate::stats::free_gaussian_check(1.0, 1e6, &grid, &kick).expect("quadrature");
    let d4 = crate::stats::free_gaussian_check(1.0, 1e4, &grid, &kick).expect("quadrature");
    vec![
        CheckResult::below("10a free-case deviation at t=1e6", d6, 1e-3, 25, seed),
        CheckResult::below("10b deviation decreasing from t=1e4", d6, d4, 25, seed)
            .with_detail(format!("d(1e4)={d4:.2e}")),
    ]
}

/// 11. Infrastructure: seed determinism across worker counts, exact torus
///     kernel symmetry, flip detector vs brute-force re-scan.
pub fn criterion_infrastructure(seed: u64) -> Vec<CheckResult> {
    use rand::Rng;
    let comb = CombParams::new(ALPHA, 30.0).expect("comb build");
    let kick = default_kick();
    let config = EnsembleConfig {
        law: ProcessLaw::BandModel { vartheta: 0.5 },
        initial: Initial::PointMass(10.3),
        t_horizon: 300.0,
        snapshots: vec![150.0, 300.0],
        n_traj: 128,
        seed,
        record: RecordPlan {
            qv_bracket: true,
            flip_rate: true,
            occupation: Some((1.0, 0.375)),
            flip_log: false,
        },
    };
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool2 = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let s1 = pool1.install(|| run_ensemble(&config, &kick, &comb)).expect("ensemble");
    let s2 = pool2.install(|| run_ensemble(&config, &kick, &comb)).expect("ensemble");
    let identical = s1.total_events == s2.total_events
        && s1.snapshots.iter().zip(&s2.snapshots).all(|(a, b)| {
            a.k == b.k && a.y == b.y && a.energy == b.energy
        })
        && s1.occupation == s2.occupation;
    let mut out = vec![CheckResult::below(
        "11a bit-identical summaries across worker counts",
        if identical { 0.0 } else { 1.0 },
        0.5,
        128,
        seed,
    )];

    let kernel = TorusKernel::new(&kick);
    let mut asym = 0.0f64;
    for i in 0..128 {
        for j in 0..i {
            let a = -0.25 + 0.5 * (i as f64 + 0.5) / 128.0;
            let b = -0.25 + 0.5 * (j as f64 + 0.5) / 128.0;
            asym = asym.max((kernel.evaluate(a, b) - kernel.evaluate(b, a)).abs());
        }
    }
    out.push(CheckResult::below(
        "11b torus kernel symmetry (machine precision)",
        asym,
        f64::EPSILON,
        128 * 128,
        seed,
    ));

    let mut rng = substream(seed, 9);
    let mut mismatches = 0u64;
    for _ in 0..1000 {
        let len = 3 + (rng.gen::<u64>() % 60) as usize;
        let k0 = if rng.gen::<f64>() < 0.5 { 5.0 } else { -5.0 };
        let events: Vec<(f64, f64)> = (0..len)
            .map(|i| {
                let s = if rng.gen::<f64>() < 0.45 { -1.0 } else { 1.0 };
                ((i + 1) as f64, s * (1.0 + rng.gen::<f64>()))
            })
            .collect();
        let fast: Vec<f64> = detect_sign_flips(k0, &events).iter().map(|f| f.time).collect();
        let brute = detect_sign_flips_by_rescan(k0, &events);
        if fast != brute {
            mismatches += 1;
        }
    }
    out.push(CheckResult::below(
        "11c flip detector vs brute-force re-scan (1e3 logs)",
        mismatches as f64,
        0.5,
        1000,
        seed,
    ));
    out
}

/// Run the full acceptance suite; prints one line per check when `verbose`.
pub fn run_all(seed: u64, verbose: bool) -> Report {
    let started = std::time::Instant::now();
    let mut checks = Vec::new();
    let sections: Vec<(&str, fn(u64) -> Vec<CheckResult>)> = vec![
        ("spectral", criterion_spectral),
        ("kappa-oracle", criterion_kappa_oracle),
        ("badterms", criterion_badterms),
        ("energy-drift", criterion_energy_drift),
        ("escape-rate", criterion_escape_rate),
        ("reflection-law", criterion_reflection_law),
        ("scaling", criterion_scaling),
        ("brownian-marginal", criterion_brownian_marginal),
        ("semiclassical", criterion_semiclassical),
        ("free-gaussian", criterion_free_gaussian),
        ("infrastructure", criterion_infrastructure),
    ];
    for (name, f) in sections {
        let t0 = std::time::Instant::now();
        let results = f(seed);
        if verbose {
            for r in &results {
                println!("{}", r.line());
            }
            println!("  [{name}: {:.1}s]", t0.elapsed().as_secs_f64());
        }
        checks.extend(results);
    }
    Report::new(checks, started.elapsed().as_secs_f64())
}
