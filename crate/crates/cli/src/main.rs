//! Batch front end for the Dirac-comb simulation toolkit.
//!
//! Subcommands:
//! - `bloch`    tabulate the dispersion (q, E), band gaps, and kick
//!              coefficients to CSV
//! - `simulate` run a trajectory ensemble and write snapshot/flip CSVs
//! - `verify`   run the full verification suite, write the JSON report,
//!              exit nonzero on failure
//! - `quantum`  semi-classical comparison histograms and distances
//! - `report`   markdown summary (and optional SVG plots) from an output dir

mod config;
mod plots;

use clap::{Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};

use bragg_core::bloch::{kappa_row, nudge_half_integer, CombParams, TruncationPolicy};
use bragg_core::kick::KickLaw;
use bragg_core::lindblad::{semiclassical_compare, BranchPolicy, SemiclassicalConfig};
use bragg_core::process::{run_ensemble, EnsembleConfig, Initial, RecordPlan};
use bragg_core::verify;

use config::{OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "bragg", about = "Dirac-comb momentum-process simulation and verification")]
struct Cli {
    /// JSON configuration file (defaults apply when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// override the master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads (default: BRAGG_JOBS or all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// override the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// override the output format
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate q(k), E(k), band gaps, and kick-coefficient rows
    Bloch,
    /// Run the configured trajectory ensemble
    Simulate,
    /// Run the verification suite and write the JSON report
    Verify,
    /// Quantum-vs-classical semi-classical comparison
    Quantum,
    /// Summarize an output directory as markdown (with optional SVG plots)
    Report,
}

fn main() {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .or_else(|| {
            std::env::var("BRAGG_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("thread pool");
    }

    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                std::process::exit(2);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.outputs.dir = out.display().to_string();
    }
    if let Some(fmt) = &cli.format {
        config.outputs.format = if fmt == "json" {
            OutputFormat::Json
        } else {
            OutputFormat::Csv
        };
    }

    let code = match run(&cli.command, &config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn run(command: &Command, config: &RunConfig) -> Result<i32, String> {
    let out_dir = PathBuf::from(&config.outputs.dir);
    fs::create_dir_all(&out_dir).map_err(|e| format!("cannot create output dir: {e}"))?;
    match command {
        Command::Bloch => cmd_bloch(config, &out_dir),
        Command::Simulate => cmd_simulate(config, &out_dir),
        Command::Verify => cmd_verify(config, &out_dir),
        Command::Quantum => cmd_quantum(config, &out_dir),
        Command::Report => cmd_report(config, &out_dir),
    }
}

/// All numeric output carries 17 significant digits.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_bloch(config: &RunConfig, out_dir: &Path) -> Result<i32, String> {
    let alpha = config.comb.alpha;
    let k_max = config.k0.abs().max(50.0) + 10.0;
    let comb = CombParams::new(alpha, k_max).map_err(|e| e.to_string())?;

    let mut spectral = String::from("k,alpha,q,E\n");
    let n = 2000;
    for i in 0..=n {
        let k = nudge_half_integer(0.02 + (k_max - 0.04) * i as f64 / n as f64);
        let q = comb.quasimomentum(k).map_err(|e| e.to_string())?;
        spectral.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f(k),
            fmt_f(alpha),
            fmt_f(q),
            fmt_f(q * q)
        ));
    }
    write_file(&out_dir.join("spectral.csv"), &spectral)?;

    let mut gaps = String::from("n,gap,alpha_over_pi\n");
    for nb in [1u32, 2, 5, 10, 20, 40, 80, 100] {
        if (nb as f64) / 2.0 + 1.0 > k_max {
            break;
        }
        let g = comb.band_gap(nb).map_err(|e| e.to_string())?;
        gaps.push_str(&format!(
            "{nb},{},{}\n",
            fmt_f(g),
            fmt_f(alpha / std::f64::consts::PI)
        ));
    }
    write_file(&out_dir.join("gaps.csv"), &gaps)?;

    let mut coeffs = String::from("k,v,n,re,im,weight\n");
    let k = nudge_half_integer(if config.k0.abs() > 1.0 { config.k0 } else { 20.3 });
    for v in [0.0, 0.5, 1.0] {
        let row =
            kappa_row(k, v, &TruncationPolicy::default(), &comb).map_err(|e| e.to_string())?;
        for (i, &n) in row.indices.iter().enumerate() {
            if row.weights[i] < 1e-12 {
                continue;
            }
            coeffs.push_str(&format!(
                "{},{},{n},{},{},{}\n",
                fmt_f(k),
                fmt_f(v),
                fmt_f(row.amplitudes[i].re),
                fmt_f(row.amplitudes[i].im),
                fmt_f(row.weights[i])
            ));
        }
    }
    write_file(&out_dir.join("coefficients.csv"), &coeffs)?;
    println!(
        "bloch tables written to {} (spectral.csv, gaps.csv, coefficients.csv)",
        out_dir.display()
    );
    Ok(0)
}

fn cmd_simulate(config: &RunConfig, out_dir: &Path) -> Result<i32, String> {
    let comb = CombParams::new(config.comb.alpha, config.k0.abs() + 120.0)
        .map_err(|e| e.to_string())?;
    let kick = KickLaw::build(&config.kick).map_err(|e| e.to_string())?;
    let ensemble = EnsembleConfig {
        law: config.law,
        initial: Initial::PointMass(config.k0),
        t_horizon: config.max_horizon(),
        snapshots: config.horizons.clone(),
        n_traj: config.n_traj,
        seed: config.seed,
        record: RecordPlan {
            flip_log: true,
            ..Default::default()
        },
    };
    let summary = run_ensemble(&ensemble, &kick, &comb)
        .map_err(|e| format!("simulation failed (seed {}): {e}", config.seed))?;

    let mut snaps = String::from("traj,t,k,y,energy\n");
    for snap in &summary.snapshots {
        for i in 0..summary.n_traj {
            snaps.push_str(&format!(
                "{i},{},{},{},{}\n",
                fmt_f(snap.time),
                fmt_f(snap.k[i]),
                fmt_f(snap.y[i]),
                fmt_f(snap.energy[i])
            ));
        }
    }
    write_file(&out_dir.join("snapshots.csv"), &snaps)?;

    let mut flips = String::from("traj,tau,k_before,k_after\n");
    if let Some(logs) = &summary.flip_logs {
        for (i, log) in logs.iter().enumerate() {
            for f in log {
                flips.push_str(&format!(
                    "{i},{},{},{}\n",
                    fmt_f(f.time),
                    fmt_f(f.k_before),
                    fmt_f(f.k_after)
                ));
            }
        }
    }
    write_file(&out_dir.join("flips.csv"), &flips)?;

    if config.outputs.format == OutputFormat::Json {
        let meta = serde_json::json!({
            "law": config.law,
            "n_traj": summary.n_traj,
            "seed": summary.seed,
            "t_horizon": summary.t_horizon,
            "total_events": summary.total_events,
            "total_flips": summary.total_flips,
        });
        write_file(
            &out_dir.join("simulate.json"),
            &serde_json::to_string_pretty(&meta).unwrap(),
        )?;
    }
    println!(
        "{} trajectories to t={} ({} events, {} flips) -> {}",
        summary.n_traj,
        summary.t_horizon,
        summary.total_events,
        summary.total_flips,
        out_dir.display()
    );
    Ok(0)
}

fn cmd_verify(config: &RunConfig, out_dir: &Path) -> Result<i32, String> {
    let report = verify::run_all(config.seed, true);
    let json = serde_json::to_string_pretty(&report).unwrap();
    write_file(&out_dir.join("verify_report.json"), &json)?;
    println!(
        "\n{} checks, {} failed, {:.1}s; report at {}",
        report.checks.len(),
        report.checks.iter().filter(|c| !c.pass).count(),
        report.elapsed_seconds,
        out_dir.join("verify_report.json").display()
    );
    Ok(if report.all_pass { 0 } else { 1 })
}

fn cmd_quantum(config: &RunConfig, out_dir: &Path) -> Result<i32, String> {
    let comb = CombParams::new(config.comb.alpha, config.k0.abs() + 60.0)
        .map_err(|e| e.to_string())?;
    let kick = KickLaw::build(&config.kick).map_err(|e| e.to_string())?;
    let sc = SemiclassicalConfig {
        k0: config.k0,
        t: config.t_quantum,
        n_realizations: config.n_realizations,
        seed: config.seed,
        bin_width: config.bin_width,
        policy: BranchPolicy::default(),
        coupled: config.coupled_noise,
    };
    let result =
        semiclassical_compare(&config.lambdas, &sc, &kick, &comb).map_err(|e| e.to_string())?;

    for (i, hist) in result.quantum.iter().enumerate() {
        let mut csv = String::from("bin_center,quantum_mass,classical_mass\n");
        for (b, (&qm, &cm)) in hist.mass.iter().zip(&result.classical[i].mass).enumerate() {
            if qm == 0.0 && cm == 0.0 {
                continue;
            }
            let center = hist.lo + (b as f64 + 0.5) * hist.bin_width;
            csv.push_str(&format!("{},{},{}\n", fmt_f(center), fmt_f(qm), fmt_f(cm)));
        }
        write_file(
            &out_dir.join(format!("quantum_lambda_{}.csv", config.lambdas[i])),
            &csv,
        )?;
    }
    let json = serde_json::to_string_pretty(&result.points).unwrap();
    write_file(&out_dir.join("semiclassical.json"), &json)?;
    for p in &result.points {
        println!(
            "lambda={:<6} L1={:.5} (mc se {:.5})",
            p.lambda, p.l1_distance, p.mc_se
        );
    }
    Ok(0)
}

fn cmd_report(config: &RunConfig, out_dir: &Path) -> Result<i32, String> {
    let mut md = String::from("# Run report\n\n");
    let verify_path = out_dir.join("verify_report.json");
    if verify_path.exists() {
        let text = fs::read_to_string(&verify_path).map_err(|e| e.to_string())?;
        let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        md.push_str("## Verification\n\n| check | statistic | target | pass |\n|---|---|---|---|\n");
        if let Some(checks) = report["checks"].as_array() {
            for c in checks {
                md.push_str(&format!(
                    "| {} | {:.6} | {:.6} | {} |\n",
                    c["name"].as_str().unwrap_or("?"),
                    c["statistic"].as_f64().unwrap_or(f64::NAN),
                    c["target"].as_f64().unwrap_or(f64::NAN),
                    if c["pass"].as_bool().unwrap_or(false) { "yes" } else { "NO" },
                ));
            }
        }
        md.push('\n');
    }
    let sem_path = out_dir.join("semiclassical.json");
    if sem_path.exists() {
        let text = fs::read_to_string(&sem_path).map_err(|e| e.to_string())?;
        md.push_str("## Semi-classical distances\n\n```json\n");
        md.push_str(&text);
        md.push_str("\n```\n\n");
    }
    let snaps = out_dir.join("snapshots.csv");
    if snaps.exists() {
        md.push_str(&format!("Snapshot data: `{}`\n\n", snaps.display()));
        if config.outputs.plots {
            if let Some(svg) = scaling_plot(&snaps) {
                let p = out_dir.join("scaling.svg");
                write_file(&p, &svg)?;
                md.push_str(&format!("![scaling]({})\n\n", p.display()));
            }
        }
    }
    if config.outputs.plots {
        for entry in fs::read_dir(out_dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            if name.starts_with("quantum_lambda_") && name.ends_with(".csv") {
                if let Some(svg) = histogram_plot(&path) {
                    let p = path.with_extension("svg");
                    write_file(&p, &svg)?;
                    md.push_str(&format!("![{name}]({})\n\n", p.display()));
                }
            }
        }
    }
    let md_path = out_dir.join("report.md");
    write_file(&md_path, &md)?;
    println!("report at {}", md_path.display());
    Ok(0)
}

/// Var(Y_t) per snapshot time from snapshots.csv, as a log-log series.
fn scaling_plot(path: &Path) -> Option<String> {
    let text = fs::read_to_string(path).ok()?;
    let mut per_time: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 4 {
            continue;
        }
        per_time
            .entry(cols[1].to_string())
            .or_default()
            .push(cols[3].parse().ok()?);
    }
    let mut pts = Vec::new();
    for (t, ys) in &per_time {
        let t: f64 = t.parse().ok()?;
        let m = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (ys.len().max(2) - 1) as f64;
        if var > 0.0 {
            pts.push((t, var));
        }
    }
    if pts.len() < 2 {
        return None;
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Some(plots::line_chart(
        "Var(Y_t) vs t",
        &[plots::Series {
            name: "Var(Y_t)",
            points: pts,
            color: "#1f77b4",
        }],
        true,
    ))
}

fn histogram_plot(path: &Path) -> Option<String> {
    let text = fs::read_to_string(path).ok()?;
    let mut q = Vec::new();
    let mut c = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            continue;
        }
        let x: f64 = cols[0].parse().ok()?;
        q.push((x, cols[1].parse().ok()?));
        c.push((x, cols[2].parse().ok()?));
    }
    if q.is_empty() {
        return None;
    }
    Some(plots::line_chart(
        "Diagonal mass per bin",
        &[
            plots::Series {
                name: "quantum",
                points: q,
                color: "#d62728",
            },
            plots::Series {
                name: "classical",
                points: c,
                color: "#2ca02c",
            },
        ],
        false,
    ))
}
