//! `resonette`: CLI front end for the resonance pipeline.
//!
//! Every subcommand reads an optional JSON config (`--config`), applies the
//! scalar overrides `--h/--mu/--theta`, runs its check, and writes a JSON
//! report plus a CSV of plot data next to `--out`. Exit codes: 0 all checks
//! passed, 1 a check failed, 2 usage/config error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use resonette_core::approximation::{build_approximation, verify_approximation};
use resonette_core::config::{
    ApproxCmd, LadderCmd, NontrapCmd, ShapeCmd, SpectrumCmd, VerifyCmd,
};
use resonette_core::distortion::{DistortionMap, DistortionProfile};
use resonette_core::experiments::{
    run_nontrapping_experiment, run_shape_experiment, ShapeModel,
};
use resonette_core::ladder::{run_ladder, uniqueness_crosscheck};
use resonette_core::operator::assemble_distorted;
use resonette_core::report;
use resonette_core::spectrum::{compute_resonances, SpectrumOptions};
use resonette_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "resonette", about = "Resonances of semiclassical Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; omitted fields take the documented defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the Planck parameter h.
    #[arg(long)]
    h: Option<f64>,
    /// Override the approximation angle μ.
    #[arg(long)]
    mu: Option<f64>,
    /// Override the distortion angle θ.
    #[arg(long)]
    theta: Option<f64>,
    /// Output stem: writes <out>.json and <out>.csv.
    #[arg(long, default_value = "resonette-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build V^μ and dump it on a real grid; checks the reality invariant.
    Approx(Common),
    /// μ-sweep decay fit of sup|⟨x⟩^ν̃ (V^μ − V)|; checks the slope floor.
    Verify(Common),
    /// One resonance set at fixed (h, μ, θ).
    Spectrum(Common),
    /// μ-ladder run with Case A/B classification and limit set.
    Ladder(Common),
    /// Shape-resonance sweep: harmonic levels and Agmon width fits.
    Shape(Common),
    /// Non-trapping emptiness check in the above-barrier box.
    Nontrap(Common),
}

fn load_config<T: Default + DeserializeOwned>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn write_outputs(out: &PathBuf, jsonv: &serde_json::Value, csv: &str) -> Result<()> {
    let jpath = out.with_extension("json");
    let cpath = out.with_extension("csv");
    fs::write(&jpath, serde_json::to_string_pretty(jsonv)?)
        .with_context(|| format!("writing {}", jpath.display()))?;
    fs::write(&cpath, csv).with_context(|| format!("writing {}", cpath.display()))?;
    println!("wrote {} and {}", jpath.display(), cpath.display());
    Ok(())
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n.max(2) - 1) as f64)
        .collect()
}

/// true → all checks passed (exit 0), false → check failure (exit 1).
fn run_approx(common: &Common) -> Result<bool> {
    let mut cfg: ApproxCmd = load_config(&common.config)?;
    if let Some(mu) = common.mu {
        cfg.mu = mu;
    }
    let v = cfg.potential.build()?;
    let nu_tilde = cfg.nu_tilde.unwrap_or(v.nu / 2.0);
    let ap = build_approximation(&v, cfg.mu, nu_tilde, &cfg.approx.build()?)?;
    let xs = linspace(cfg.x_min, cfg.x_max, cfg.n_points);
    let csv = report::approx_csv(&ap, &v, &xs)?;
    // reality invariant: |Im V^μ| < 1e−12 (1 + |V^μ|) on the real line
    let mut worst: f64 = 0.0;
    for &x in &xs {
        let im = ap.imag_on_real(x)?.abs();
        let re = ap.eval_real(x)?.abs();
        worst = worst.max(im / (1.0 + re));
    }
    let pass = worst < 1e-12;
    let jsonv = json!({
        "potential": cfg.potential.name,
        "mu": cfg.mu,
        "nu_tilde": nu_tilde,
        "exact_mode": ap.exact_mode,
        "truncation_estimate": ap.truncation_estimate,
        "reality_worst": worst,
        "pass": pass,
    });
    write_outputs(&common.out, &jsonv, &csv)?;
    println!("reality check: worst |Im V^μ|/(1+|V^μ|) = {worst:.3e} → {}",
        if pass { "pass" } else { "FAIL" });
    Ok(pass)
}

fn run_verify(common: &Common) -> Result<bool> {
    let cfg: VerifyCmd = load_config(&common.config)?;
    let v = cfg.potential.build()?;
    let nu_tilde = cfg.nu_tilde.unwrap_or(v.nu / 2.0);
    let mu0 = cfg.mu_grid.iter().cloned().fold(f64::MIN, f64::max);
    let ap = build_approximation(&v, mu0, nu_tilde, &cfg.approx.build()?)?;
    let xs = linspace(cfg.x_min, cfg.x_max, cfg.n_points);
    let rep = verify_approximation(&ap, &cfg.mu_grid, &xs, cfg.n_floor)?;
    let csv = report::verify_csv(&rep);
    write_outputs(&common.out, &serde_json::to_value(&rep)?, &csv)?;
    println!(
        "decay fit: slope {:.3} (floor {}) → {}",
        rep.slope,
        cfg.n_floor,
        if rep.pass { "pass" } else { "FAIL" }
    );
    Ok(rep.pass)
}

fn run_spectrum(common: &Common) -> Result<bool> {
    let mut cfg: SpectrumCmd = load_config(&common.config)?;
    if let Some(h) = common.h {
        cfg.h = h;
    }
    if let Some(mu) = common.mu {
        cfg.mu = mu;
    }
    if common.theta.is_some() {
        cfg.theta = common.theta;
    }
    let v = cfg.potential.build()?;
    let nu_tilde = cfg.nu_tilde.unwrap_or(v.nu / 2.0);
    let theta = cfg.theta.unwrap_or(cfg.mu);
    let approx = build_approximation(&v, cfg.mu, nu_tilde, &cfg.approx.build()?)?;
    let profile = DistortionProfile::from_h(cfg.h, cfg.n1, cfg.r0)?;
    let grid = cfg.grid.build()?;
    let window = cfg.window.build()?;
    let opts = SpectrumOptions {
        lambda0: cfg.lambda0,
        stability_tol: cfg.stability_tol,
        ..Default::default()
    };
    let set = compute_resonances(
        &|th| {
            let map = DistortionMap::new(profile.clone(), th)?;
            assemble_distorted(&approx, &map, cfg.h, &grid)
        },
        theta,
        &window,
        &opts,
    )?;
    let csv = set.csv();
    write_outputs(&common.out, &serde_json::to_value(&set)?, &csv)?;
    println!("{} resonance(s) in the window", set.count());
    Ok(true)
}

fn run_ladder_cmd(common: &Common) -> Result<bool> {
    let mut cfg: LadderCmd = load_config(&common.config)?;
    if let Some(h) = common.h {
        cfg.h = h;
    }
    if let Some(mu) = common.mu {
        cfg.mu_tilde = mu;
    }
    let v = cfg.potential.build()?;
    let grid = cfg.grid.build()?;
    let lcfg = cfg.ladder_config();
    let run = run_ladder(&v, &lcfg, &grid, &cfg.approx.build()?, cfg.r0)?;
    let csv = report::ladder_csv(&run);
    let mut pass = true;
    let mut jsonv = serde_json::to_value(&run)?;
    if cfg.crosscheck {
        // rebuild with the alternative χ₁ profile; the two limit sets must
        // agree element-wise to 𝒪(|Im λ|³)
        let mut alt = cfg.approx.clone();
        alt.glue = Some("alternative".into());
        let run_b = run_ladder(&v, &lcfg, &grid, &alt.build()?, cfg.r0)?;
        let cc = uniqueness_crosscheck(&run.limit, &run_b.limit, 50.0);
        pass = !cc.real_mismatch && cc.pairs.iter().all(|p| !p.flagged);
        println!(
            "crosscheck: max |B(λ)−λ|/|Im λ| = {:.3e} → {}",
            cc.max_ratio1,
            if pass { "pass" } else { "FAIL" }
        );
        jsonv = json!({ "run": jsonv, "crosscheck": cc });
    }
    write_outputs(&common.out, &jsonv, &csv)?;
    println!(
        "ladder: {} rung(s), {} chain(s), {} limit element(s)",
        run.rungs.len(),
        run.chains.len(),
        run.limit.entries.len()
    );
    Ok(pass)
}

fn run_shape(common: &Common) -> Result<bool> {
    let mut cfg: ShapeCmd = load_config(&common.config)?;
    if let Some(mu) = common.mu {
        cfg.mu = mu;
    }
    let model = ShapeModel::new(cfg.lambda0)?;
    let rep = run_shape_experiment(&model, &cfg.shape_config()?)?;
    let csv = report::shape_csv(&rep);
    write_outputs(&common.out, &serde_json::to_value(&rep)?, &csv)?;
    let im_ok = (rep.im_slope - rep.im_slope_target).abs()
        <= cfg.im_slope_rel_tol * rep.im_slope_target.abs();
    let re_ok = rep.re_defect_slope >= cfg.re_slope_floor;
    let pass = re_ok && im_ok && !rep.missing_levels && rep.widths_negative
        && rep.window_compliance;
    println!(
        "re-defect slope {:.3} (floor {}), im slope {:.3} (target {:.3}) → {}",
        rep.re_defect_slope,
        cfg.re_slope_floor,
        rep.im_slope,
        rep.im_slope_target,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(pass)
}

fn run_nontrap(common: &Common) -> Result<bool> {
    let mut cfg: NontrapCmd = load_config(&common.config)?;
    if let Some(h) = common.h {
        cfg.h_list = vec![h];
    }
    let v = cfg.potential.build()?;
    let rep = run_nontrapping_experiment(&v, &cfg.nontrap_config()?)?;
    let csv = report::nontrap_csv(&rep);
    write_outputs(&common.out, &serde_json::to_value(&rep)?, &csv)?;
    for run in &rep.runs {
        println!(
            "h = {:.4}: {} resonance(s) in the box, min distance {:.3e}",
            run.h, run.count, run.min_distance
        );
    }
    Ok(rep.all_empty)
}

/// Map core errors onto the exit-code contract: config/validation problems
/// are usage errors (2), everything else is a failed check (1).
fn exit_for(err: &anyhow::Error) -> ExitCode {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Config(_) | CoreError::Validation(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
        {
            return ExitCode::from(2);
        }
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Approx(c) => run_approx(c),
        Command::Verify(c) => run_verify(c),
        Command::Spectrum(c) => run_spectrum(c),
        Command::Ladder(c) => run_ladder_cmd(c),
        Command::Shape(c) => run_shape(c),
        Command::Nontrap(c) => run_nontrap(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    }
}
