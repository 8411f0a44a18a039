use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use manifold_doa::estimators::{pick_estimate, SpectrumKind};
use manifold_doa::geometry::{curvature_analytic, curvature_series, torsion_analytic};
use manifold_doa::harness::montecarlo::describe_run;
use manifold_doa::harness::output::{fmt_f64, output_dir, ArtifactWriter, Table};
use manifold_doa::harness::{
    monte_carlo, run_experiment, validate, Experiment, Scenario, ScenarioConfig,
};
use manifold_doa::sg::numerical_derivatives;

#[derive(Parser)]
#[command(
    name = "mdoa",
    version,
    about = "Wideband DOA simulation on the dynamic observation manifold"
)]
struct Cli {
    /// Output directory [default: $MDOA_OUTPUT_DIR, else ./out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the configured observation.
    Simulate { config: PathBuf },
    /// Curvature and torsion series of the configured observation.
    Frame { config: PathBuf },
    /// DOA spectrum of the configured observation.
    Spectrum {
        config: PathBuf,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
    },
    /// RMSE against SNR.
    Montecarlo {
        config: PathBuf,
        /// Trials per SNR; defaults to the config's monte_carlo.trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Inclusive SNR range `start:stop:step` in dB; defaults to the config's list.
        #[arg(long)]
        snr: Option<String>,
    },
    /// Run an experiment preset (E1 to E6).
    Experiment { preset: String },
    /// Run the invariant self-check suite.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    F1,
    F2,
    Music,
}

impl From<EstimatorArg> for SpectrumKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::F1 => SpectrumKind::Framework1,
            EstimatorArg::F2 => SpectrumKind::Framework2,
            EstimatorArg::Music => SpectrumKind::Music,
        }
    }
}

fn parse_snr_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number `{p}` in --snr"))
        })
        .collect::<Result<Vec<_>>>()?;
    match nums.as_slice() {
        [one] => Ok(vec![*one]),
        [a, b, step] => {
            if !(step.is_finite() && *step > 0.0 && a.is_finite() && b.is_finite() && b >= a) {
                bail!("--snr needs finite start <= stop and a positive step");
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        _ => bail!("--snr expects `start:stop:step` or a single value"),
    }
}

fn load(config: &Path) -> Result<Scenario> {
    let cfg = ScenarioConfig::from_file(config)
        .with_context(|| format!("loading {}", config.display()))?;
    Ok(Scenario::resolve(&cfg)?)
}

fn run_dir(base: &Path, config: &Path, command: &str) -> PathBuf {
    let stem = config
        .file_stem()
        .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    base.join(stem).join(command)
}

fn simulate(scn: &Scenario, w: &mut ArtifactWriter) -> Result<()> {
    let x = scn.observe(0)?;
    let mut cols = vec!["t_s".to_string()];
    for m in 0..x.elements() {
        cols.push(format!("x{m}_re"));
        cols.push(format!("x{m}_im"));
    }
    let mut t = Table::new(cols);
    for n in 0..x.len() {
        let mut row = vec![x.grid().time(n)];
        for m in 0..x.elements() {
            let z = x.at(m, n);
            row.extend([z.re, z.im]);
        }
        t.push_f64(&row);
    }
    w.table("observation", &t, json!({ "scenario": scn.describe() }))?;
    Ok(())
}

fn frame(scn: &Scenario, w: &mut ArtifactWriter) -> Result<()> {
    let stack = numerical_derivatives(&scn.observe(0)?, &scn.estimator.sg.with_max_deriv(3))?;
    let s = curvature_series(&stack)?;
    let mut t = Table::new([
        "t_s",
        "kappa1",
        "kappa2",
        "speed",
        "flags",
        "kappa1_analytic",
        "kappa2_analytic",
    ]);
    for (n, &tt) in s.times.iter().enumerate() {
        let law = curvature_analytic(&scn.model, &scn.geometry, scn.theta_true, tt);
        t.push(vec![
            fmt_f64(tt),
            fmt_f64(s.kappa1[n]),
            s.kappa2[n].map(fmt_f64).unwrap_or_default(),
            fmt_f64(s.speed[n]),
            s.flags[n].to_string(),
            fmt_f64(law.kappa1),
            fmt_f64(torsion_analytic(
                &scn.model,
                &scn.geometry,
                scn.theta_true,
                tt,
            )),
        ]);
    }
    w.table(
        "curvature",
        &t,
        json!({ "scenario": scn.describe(), "flags": { "1": "principal normal undefined", "2": "binormal undefined" } }),
    )?;
    Ok(())
}

fn spectrum(scn: &Scenario, kind: SpectrumKind, w: &mut ArtifactWriter) -> Result<()> {
    let spec = scn.spectrum(&scn.observe(0)?, kind)?;
    let norm = spec.peak_normalized();
    let mut t = Table::new(["theta_deg", "value", "normalized"]);
    for (i, th) in spec.thetas().iter().enumerate() {
        t.push_f64(&[th.to_degrees(), spec.values[i], norm.values[i]]);
    }
    let estimate = pick_estimate(&spec).ok().map(|e| {
        json!({
            "theta_hat_deg": e.theta_hat.to_degrees(),
            "ties": e.ties,
            "peaks_deg": e.peaks.iter().take(10).map(|p| [p.0.to_degrees(), p.1]).collect::<Vec<_>>(),
        })
    });
    w.table(
        &format!("spectrum_{kind}"),
        &t,
        json!({ "scenario": scn.describe(), "estimator": kind, "valid": spec.valid, "estimate": estimate }),
    )?;
    if let Some(e) = &estimate {
        eprintln!("{kind}: theta_hat = {} deg", e["theta_hat_deg"]);
    } else {
        eprintln!("{kind}: spectrum invalid for this scenario");
    }
    Ok(())
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let base = cli.out.clone().unwrap_or_else(output_dir);
    match cli.command {
        Command::Simulate { config } => {
            let scn = load(&config)?;
            let mut w = ArtifactWriter::new(run_dir(&base, &config, "simulate"))?;
            simulate(&scn, &mut w)?;
            print_files(w.files());
        }
        Command::Frame { config } => {
            let scn = load(&config)?;
            let mut w = ArtifactWriter::new(run_dir(&base, &config, "frame"))?;
            frame(&scn, &mut w)?;
            print_files(w.files());
        }
        Command::Spectrum { config, estimator } => {
            let scn = load(&config)?;
            let mut w = ArtifactWriter::new(run_dir(&base, &config, "spectrum"))?;
            spectrum(&scn, estimator.into(), &mut w)?;
            print_files(w.files());
        }
        Command::Montecarlo {
            config,
            trials,
            snr,
        } => {
            let scn = load(&config)?;
            let trials = trials.unwrap_or(scn.config.monte_carlo.trials);
            if trials == 0 {
                bail!("--trials must be at least 1");
            }
            let snrs = match snr {
                Some(s) => parse_snr_range(&s)?,
                None => scn.config.monte_carlo.snr_db.clone(),
            };
            let table = monte_carlo(&scn, &snrs, trials)?;
            let mut w = ArtifactWriter::new(run_dir(&base, &config, "montecarlo"))?;
            let meta = describe_run(&scn, &snrs, trials);
            w.table("rmse", &table.summary_table(), meta.clone())?;
            w.table("trials", &table.trials_table(), meta)?;
            print_files(w.files());
        }
        Command::Experiment { preset } => {
            let e: Experiment = preset.parse()?;
            let run = run_experiment(e, &base)?;
            print_files(&run.files);
            for c in run.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {} ({})", c.name, c.detail);
            }
        }
        Command::Validate => {
            let report = validate();
            let mut w = ArtifactWriter::new(base.join("validate"))?;
            w.json("report", &serde_json::to_value(&report)?)?;
            for c in &report.checks {
                eprintln!(
                    "{} {}: {}",
                    if c.passed { "ok  " } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            print_files(w.files());
            if !report.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
