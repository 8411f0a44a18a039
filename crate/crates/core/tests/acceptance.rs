//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are pinned below.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use manifold_doa::array::{half_wavelength, ArrayGeometry, DelayReference};
use manifold_doa::estimators::{pick_estimate, Spectrum, SpectrumKind};
use manifold_doa::generator::{
    ambiguity_residual, analytic_derivatives, anti_hermitian_residual, build_operator_stack, jerk,
    jerk_literal, norm, odd_even_residual,
};
use manifold_doa::geometry::{
    curvature_analytic, curvature_series, frenet_frame, torsion_analytic,
};
use manifold_doa::harness::config::{PhaseErrorConfig, ScenarioConfig, WaveformKind};
use manifold_doa::harness::presets::{self, Experiment};
use manifold_doa::harness::{monte_carlo, run_experiment, Scenario};
use manifold_doa::sg::{numerical_derivatives, SgConfig};
use manifold_doa::signal::SignalModel;
use manifold_doa::synthesis::{
    apply_phase_error, default_dt, synthesize, PhaseErrorModel, SamplingGrid,
};

const HYPERSPHERE_TOL: f64 = 1e-9;
const ANTI_HERMITIAN_TOL: f64 = 1e-12;
const ODD_EVEN_TOL: f64 = 1e-9;
const JERK_FORMS_TOL: f64 = 1e-12;
const DERIV_VA_TOL: f64 = 1e-3;
const DERIV_J_TOL: f64 = 1e-2;
const MP_KAPPA_REL_TOL: f64 = 0.01;
/// κ₂ of a monopulse counts as zero below this fraction of κ₁.
const MP_KAPPA2_ZERO: f64 = 1e-3;
const SYNTHESIS_LAW_TOL: f64 = 0.05;
const TORSION_LAW_TOL: f64 = 0.10;
const PROJECTION_VS_MEASUREMENT_TOL: f64 = 1e-3;
const INVARIANCE_TOL: f64 = 1e-9;
const INVARIANCE_DRAWS: u64 = 20;
const ALIAS_MP_TOL: f64 = 1e-9;
const ALIAS_LFM_MIN: f64 = 1e-3;
const PEAK_TOL_DEG: f64 = 0.05;
/// Framework I peaks scoring at least this much join the peak set.
const PEAK_SET_FRACTION: f64 = 0.99;
/// MUSIC peaks join the peak set when at most this fraction of the steering
/// vector's energy falls in the noise subspace. MUSIC peak heights depend on
/// how close the grid comes to each lobe, so a height ratio is meaningless.
const MUSIC_NOISE_FRACTION: f64 = 0.01;
const LOBE_SUPPRESSION_DB: f64 = 3.0;
const GAMMA_DROP: f64 = 0.5;
const F2_RMSE_MAX_DEG: f64 = 0.2;
const F1_FLOOR_REL: f64 = 0.2;
const F2_ALLOWED_INVERSIONS: usize = 1;
/// Γ draws used to show that Framework I's error under Γ does not depend on noise.
const F1_GAMMA_DRAWS: u64 = 12;
const F1_GAMMA_GRID_STEP_DEG: f64 = 0.5;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

type Criterion = fn() -> Result<Outcome, Box<dyn std::error::Error>>;

fn d() -> f64 {
    half_wavelength(2e9)
}

fn linear(coords: &[f64], r: DelayReference) -> ArrayGeometry {
    ArrayGeometry::linear(coords, d(), r).unwrap()
}

fn models() -> [(&'static str, SignalModel); 3] {
    [
        ("mp", SignalModel::mp()),
        ("lfm", SignalModel::lfm()),
        ("sfm", SignalModel::sfm()),
    ]
}

fn within_budget(start: Instant, budget: Duration) -> (bool, String) {
    let took = start.elapsed();
    (
        took <= budget,
        format!("{:.1}s of {:.0}s", took.as_secs_f64(), budget.as_secs_f64()),
    )
}

/// Wall-clock budgets are stated for an 8-core machine; scale them when
/// fewer cores are available.
fn scaled_budget(secs: u64) -> Duration {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    Duration::from_secs(secs * (8 / cores.min(8)).max(1))
}

fn c1_hypersphere() -> Result<Outcome, Box<dyn std::error::Error>> {
    let start = Instant::now();
    let theta = 30f64.to_radians();
    let mut worst = 0.0f64;
    for (_, model) in models() {
        for coords in [
            &[0.0, 5.0][..],
            &[0.0, 0.5, 10.5],
            &[0.0, 1.0, 3.0, 7.0, 12.0],
        ] {
            let g = linear(coords, DelayReference::FirstElement);
            let grid = SamplingGrid::for_delays(
                &model,
                (0.0, g.delays(theta)[coords.len() - 1]),
                0.0,
                default_dt(&model, 32.0),
            )?;
            let x = synthesize(&model, &g, theta, &grid)?;
            let r = (coords.len() as f64).sqrt();
            for n in 0..x.len() {
                worst = worst.max((x.sample_norm(n) - r).abs() / r);
            }
        }
    }
    let (fast, t) = within_budget(start, Duration::from_secs(5));
    Ok(outcome(
        worst < HYPERSPHERE_TOL && fast,
        format!("max |‖x‖-√M|/√M = {worst:.2e}, {t}"),
    ))
}

fn preset_configs() -> Vec<ScenarioConfig> {
    let mut v = Vec::new();
    for kind in [WaveformKind::Mp, WaveformKind::Lfm, WaveformKind::Sfm] {
        v.push(presets::e1_scenario(kind));
        v.push(presets::e2_scenario(kind));
        for a in presets::E4_APERTURES_D {
            v.push(presets::e4_scenario(kind, a));
        }
    }
    v.extend(presets::e5_cases().into_iter().map(|c| c.config));
    v.push(presets::e6_scenario());
    v
}

fn c2_operator_algebra() -> Result<Outcome, Box<dyn std::error::Error>> {
    let (mut l1, mut c1, mut jf) = (0.0f64, 0.0f64, 0.0f64);
    let configs = preset_configs();
    for cfg in &configs {
        let scn = Scenario::resolve(cfg)?;
        // The leading samples of every window are enough to exercise each
        // waveform's frequency law; full windows repeat the same arithmetic.
        let n = scn.sampling.n_samples.min(3000);
        let grid = SamplingGrid::new(scn.sampling.t_start, scn.sampling.dt, n)?;
        let ops = build_operator_stack(&scn.model, &scn.geometry, scn.theta_true, &grid)?;
        let x = synthesize(&scn.model, &scn.geometry, scn.theta_true, &grid)?;
        l1 = l1.max(anti_hermitian_residual(&ops));
        for k in 0..ops.len() {
            let col = x.column(k);
            let at = ops.at(k);
            c1 = c1.max(odd_even_residual(&col, at.omega));
            let (a, b) = (jerk(&col, &at), jerk_literal(&col, &at));
            let diff: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
            jf = jf.max(norm(&diff) / norm(&a));
        }
    }
    Ok(outcome(
        l1 < ANTI_HERMITIAN_TOL && c1 < ODD_EVEN_TOL && jf < JERK_FORMS_TOL,
        format!(
            "{} presets: max|Re Ω|/|Ω| = {l1:.1e}, odd/even cosine = {c1:.1e}, jerk forms gap = {jf:.1e}",
            configs.len()
        ),
    ))
}

fn c3_derivatives() -> Result<Outcome, Box<dyn std::error::Error>> {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [WaveformKind::Lfm, WaveformKind::Sfm] {
        let mut cfg = presets::e2_scenario(kind);
        cfg.snr_db = None;
        let scn = Scenario::resolve(&cfg)?;
        let ana =
            analytic_derivatives(&scn.model, &scn.geometry, scn.theta_true, &scn.sampling, 3)?;
        let num = numerical_derivatives(&scn.clean()?, &SgConfig::default())?;
        let e = presets::derivative_errors(&num, &ana);
        ok &= e[0] < DERIV_VA_TOL && e[1] < DERIV_VA_TOL && e[2] < DERIV_J_TOL;
        parts.push(format!(
            "{kind:?} v {:.1e} a {:.1e} j {:.1e}",
            e[0], e[1], e[2]
        ));
    }
    let (fast, t) = within_budget(start, Duration::from_secs(30));
    Ok(outcome(ok && fast, format!("{}, {t}", parts.join("; "))))
}

fn c4_mp_baseline() -> Result<Outcome, Box<dyn std::error::Error>> {
    let mut cfg = presets::e4_scenario(WaveformKind::Mp, 1.0);
    cfg.estimator.sg = SgConfig::default();
    let scn = Scenario::resolve(&cfg)?;
    let series = curvature_series(&numerical_derivatives(&scn.clean()?, &SgConfig::default())?)?;
    let mean = series.mean_kappa1();
    let want = 1.0 / 3f64.sqrt();
    let rel = (mean - want).abs() / want;
    let flat = series
        .kappa2
        .iter()
        .zip(&series.kappa1)
        .all(|(k2, k1)| k2.is_none_or(|k2| k2 < MP_KAPPA2_ZERO * k1));
    let undefined = series.kappa2.iter().filter(|k| k.is_none()).count();
    Ok(outcome(
        rel < MP_KAPPA_REL_TOL && flat,
        format!(
            "mean κ1 = {mean:.6} (rel {rel:.1e}); κ2 undefined at {undefined}/{} samples, rest ≈ 0: {flat}",
            series.kappa2.len()
        ),
    ))
}

fn c5_synthesis_law() -> Result<Outcome, Box<dyn std::error::Error>> {
    let model = SignalModel::lfm();
    let g = linear(&[0.0, 5.0, 10.0], DelayReference::FirstElement);
    let theta = 30f64.to_radians();
    let grid = SamplingGrid::for_delays(
        &model,
        (0.0, g.delays(theta)[2]),
        0.0,
        default_dt(&model, 32.0),
    )?;
    let series = curvature_series(&analytic_derivatives(&model, &g, theta, &grid, 3)?)?;
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for (n, &t) in series.times.iter().enumerate() {
        let law = curvature_analytic(&model, &g, theta, t);
        e1 = e1.max((series.kappa1[n] - law.kappa1).abs() / law.kappa1);
        let k2 = series.kappa2[n].ok_or("torsion undefined")?;
        let tw = torsion_analytic(&model, &g, theta, t);
        e2 = e2.max((k2 - tw).abs() / tw);
    }
    Ok(outcome(
        e1 < SYNTHESIS_LAW_TOL && e2 < TORSION_LAW_TOL,
        format!("κ1 vs √(κ_geo²+κ_dyn²) max rel {e1:.1e}; κ2 vs |κ_dyn| max rel {e2:.1e}"),
    ))
}

fn c6_aperture_ordering() -> Result<Outcome, Box<dyn std::error::Error>> {
    let mut rows = Vec::new();
    for a in [1.0, 5.0, 50.0] {
        let scn = Scenario::resolve(&presets::e4_scenario(WaveformKind::Lfm, a))?;
        let c = presets::aperture_curvature(&scn, &scn.clean()?, &presets::E4_MEASUREMENT_SG)?;
        rows.push((a, c.kappa1_error_analytic(), c.kappa1_error_projection()));
    }
    let ordered = rows[2].1 > rows[1].1 && rows[1].1 > rows[0].1;
    let proj_ok = rows.iter().all(|r| r.2 < PROJECTION_VS_MEASUREMENT_TOL);
    let detail = rows
        .iter()
        .map(|(a, an, p)| format!("{a}d analytic {an:.2e} projection {p:.2e}"))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(outcome(ordered && proj_ok, detail))
}

fn c7_invariance() -> Result<Outcome, Box<dyn std::error::Error>> {
    let model = SignalModel::lfm();
    let g = linear(&[0.0, 5.0, 10.0], DelayReference::FirstElement);
    let theta = 30f64.to_radians();
    let grid = SamplingGrid::new(20e-9, default_dt(&model, 32.0), 3000)?;
    let x = synthesize(&model, &g, theta, &grid)?;
    let sg = SgConfig::default();
    let base_stack = numerical_derivatives(&x, &sg)?;
    let base = curvature_series(&base_stack)?;
    let base_frame = frenet_frame(&base_stack)?;
    let (mut dk, mut du) = (0.0f64, 0.0f64);
    for seed in 0..INVARIANCE_DRAWS {
        let gamma = PhaseErrorModel::random(3, 1000 + seed);
        let gains = gamma.gains();
        let stack = numerical_derivatives(&apply_phase_error(&x, &gamma)?, &sg)?;
        let s = curvature_series(&stack)?;
        let f = frenet_frame(&stack)?;
        for n in 0..s.kappa1.len() {
            dk = dk.max((s.kappa1[n] - base.kappa1[n]).abs() / base.kappa1[n]);
            let (a, b) = (
                s.kappa2[n].ok_or("κ2 undefined")?,
                base.kappa2[n].ok_or("κ2 undefined")?,
            );
            dk = dk.max((a - b).abs() / b);
            let (fs, bs) = (&f.samples[n], &base_frame.samples[n]);
            let pairs = [
                (&fs.u1, &bs.u1),
                (fs.u2.as_ref().ok_or("u2")?, bs.u2.as_ref().ok_or("u2")?),
                (fs.u3.as_ref().ok_or("u3")?, bs.u3.as_ref().ok_or("u3")?),
            ];
            for (u, ub) in pairs {
                let diff: f64 = u
                    .iter()
                    .zip(ub)
                    .zip(&gains)
                    .map(|((p, q), gm)| (p - gm * q).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                du = du.max(diff);
            }
        }
    }
    Ok(outcome(
        dk < INVARIANCE_TOL && du < INVARIANCE_TOL,
        format!(
            "{INVARIANCE_DRAWS} draws: κ max rel change {dk:.1e}, ‖u_i(Γx) − Γu_i(x)‖ max {du:.1e}"
        ),
    ))
}

fn c8_ambiguity() -> Result<Outcome, Box<dyn std::error::Error>> {
    let g = linear(&[0.0, 5.0, 10.0], DelayReference::FirstElement);
    let theta = 20f64.to_radians();
    let lobes = g.grating_lobe_angles(theta, SignalModel::mp().carrier_omega())?;
    let alias = lobes
        .iter()
        .copied()
        .filter(|l| (l - theta).abs() > 1e-6)
        .min_by(|a, b| (a - theta).abs().total_cmp(&(b - theta).abs()))
        .ok_or("no aliased angle")?;
    let mut res = [0.0; 2];
    for (i, model) in [SignalModel::mp(), SignalModel::lfm()].iter().enumerate() {
        let tmax = g.delays(theta)[2].max(g.delays(alias)[2]).max(0.0);
        let tmin = g.delays(theta)[2].min(g.delays(alias)[2]).min(0.0);
        let grid = SamplingGrid::for_delays(model, (tmin, tmax), 0.0, default_dt(model, 32.0))?;
        res[i] = ambiguity_residual(model, &g, theta, alias, &grid)?
            .relative()
            .into_iter()
            .fold(0.0, f64::max);
    }
    Ok(outcome(
        res[0] < ALIAS_MP_TOL && res[1] > ALIAS_LFM_MIN,
        format!(
            "pair 20° / {:.3}°: MP max ‖Δv‖/‖v‖ = {:.1e}, LFM max = {:.1e}",
            alias.to_degrees(),
            res[0],
            res[1]
        ),
    ))
}

/// Angles where the narrowband steering match to `theta0` is perfect, found
/// by a dense scan independent of the closed-form lobe formula.
fn brute_force_lobes(g: &ArrayGeometry, theta0: f64, omega: f64) -> Vec<f64> {
    let a0 = manifold_doa::array::steering_from_delays(&g.delays(theta0), omega);
    let m = a0.len() as f64;
    let n = 180_001;
    let score = |i: usize| -> (f64, f64) {
        let th = (-90.0 + 180.0 * i as f64 / (n - 1) as f64).to_radians();
        let a = manifold_doa::array::steering_from_delays(&g.delays(th), omega);
        let c: Complex64 = a.iter().zip(&a0).map(|(p, q)| p.conj() * q).sum();
        (th, c.norm() / m)
    };
    let vals: Vec<(f64, f64)> = (0..n).map(score).collect();
    (0..n)
        .filter(|&i| {
            let v = vals[i].1;
            v > 1.0 - 1e-4 && (i == 0 || v >= vals[i - 1].1) && (i == n - 1 || v > vals[i + 1].1)
        })
        .map(|i| vals[i].0)
        .collect()
}

fn sets_match(found: &[f64], want: &[f64], tol: f64) -> bool {
    found.len() == want.len()
        && want
            .iter()
            .all(|w| found.iter().any(|f| (f - w).abs() <= tol))
        && found
            .iter()
            .all(|f| want.iter().any(|w| (f - w).abs() <= tol))
}

fn peak_set(spec: &Spectrum, m: usize) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let est = pick_estimate(spec)?;
    Ok(match spec.kind {
        // Values are 1/‖P_n a‖² with ‖a‖² = M.
        SpectrumKind::Music => est
            .peaks
            .iter()
            .filter(|p| 1.0 / p.1 <= MUSIC_NOISE_FRACTION * m as f64)
            .map(|p| p.0)
            .collect(),
        _ => est
            .peaks_above(PEAK_SET_FRACTION)
            .into_iter()
            .map(|p| p.0)
            .collect(),
    })
}

fn fmt_deg(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{:.2}", x.to_degrees()))
        .collect::<Vec<_>>()
        .join(",")
}

fn c9_spectra() -> Result<Outcome, Box<dyn std::error::Error>> {
    let start = Instant::now();
    let cases = presets::e5_cases();
    let get = |name: &str| {
        cases
            .iter()
            .find(|c| c.name == name)
            .cloned()
            .ok_or("missing case")
    };
    let mut detail = Vec::new();
    let mut ok = true;

    // (a) monopulse on the 5d array.
    let (scn, spectra) = presets::case_spectra(&get("mp_5d")?)?;
    let step = scn.grid.step;
    let lobes = brute_force_lobes(&scn.geometry, scn.theta_true, scn.model.carrier_omega());
    let m = scn.geometry.len();
    let f1 = peak_set(&spectra[0], m)?;
    let music = peak_set(&spectra[2], m)?;
    let a_ok = sets_match(&f1, &lobes, step * 1.000_001)
        && sets_match(&music, &lobes, step * 1.000_001)
        && !spectra[1].valid;
    ok &= a_ok;
    detail.push(format!(
        "(a) lobes [{}] F1 [{}] MUSIC [{}] F2 valid={} -> {}",
        fmt_deg(&lobes),
        fmt_deg(&f1),
        fmt_deg(&music),
        spectra[1].valid,
        a_ok
    ));

    // (b) LFM on the 50d array, no phase error.
    let (scn, clean) = presets::case_spectra(&get("lfm_50d")?)?;
    let th0 = scn.theta_true;
    let tol = PEAK_TOL_DEG.to_radians() + 1e-12;
    let f1 = pick_estimate(&clean[0])?;
    let f1_peak = clean[0].values.iter().cloned().fold(0.0, f64::max);
    let lobe_angles: Vec<f64> = scn
        .geometry
        .grating_lobe_angles(th0, scn.model.carrier_omega())?
        .into_iter()
        .filter(|l| (l - th0).abs() > 1e-6)
        .collect();
    let worst_lobe_db = lobe_angles
        .iter()
        .map(|&l| 10.0 * (clean[0].value_near(l) / f1_peak).log10())
        .fold(f64::NEG_INFINITY, f64::max);
    let f2 = pick_estimate(&clean[1])?;
    let top2: Vec<f64> = f2.peaks.iter().take(2).map(|p| p.0).collect();
    let pm_ok = |v: &[f64]| {
        v.len() == 2
            && v.iter().any(|t| (t - th0).abs() <= tol)
            && v.iter().any(|t| (t + th0).abs() <= tol)
    };
    let b_ok =
        (f1.theta_hat - th0).abs() <= tol && worst_lobe_db <= -LOBE_SUPPRESSION_DB && pm_ok(&top2);
    ok &= b_ok;
    detail.push(format!(
        "(b) F1 peak {:.2}°, {} lobes, strongest {worst_lobe_db:.1} dB; F2 top-2 [{}] -> {b_ok}",
        f1.theta_hat.to_degrees(),
        lobe_angles.len(),
        fmt_deg(&top2)
    ));

    // (c) same with phase error.
    let (_, gamma) = presets::case_spectra(&get("lfm_50d_gamma")?)?;
    let at_true_clean = clean[0].value_near(th0);
    let at_true_gamma = gamma[0].value_near(th0);
    let f1g = pick_estimate(&gamma[0])?;
    let dropped = at_true_gamma <= GAMMA_DROP * at_true_clean;
    let moved = (f1g.theta_hat - th0).abs() > tol;
    let f2g = pick_estimate(&gamma[1])?;
    let top2g: Vec<f64> = f2g.peaks.iter().take(2).map(|p| p.0).collect();
    let c_ok = (dropped || moved) && pm_ok(&top2g);
    ok &= c_ok;
    detail.push(format!(
        "(c) F1 score at 20° {at_true_clean:.3} -> {at_true_gamma:.3}, peak {:.2}°; F2 top-2 [{}] -> {c_ok}",
        f1g.theta_hat.to_degrees(),
        fmt_deg(&top2g)
    ));

    let (fast, t) = within_budget(start, scaled_budget(300));
    detail.push(t);
    Ok(outcome(ok && fast, detail.join(" | ")))
}

fn c10_monte_carlo() -> Result<Outcome, Box<dyn std::error::Error>> {
    let start = Instant::now();
    let cfg = presets::e6_scenario();
    let scn = Scenario::resolve(&cfg)?;
    let snrs = cfg.monte_carlo.snr_db.clone();
    let table = monte_carlo(&scn, &snrs, cfg.monte_carlo.trials)?;
    let f2 = table.series(SpectrumKind::Framework2);
    let f1 = table.series(SpectrumKind::Framework1);
    let inversions: Vec<usize> = (1..f2.len()).filter(|&i| f2[i].1 > f2[i - 1].1).collect();
    // A tolerated inversion must sit in the lower half of the SNR range.
    let mono =
        inversions.len() <= F2_ALLOWED_INVERSIONS && inversions.iter().all(|&i| i <= f2.len() / 2);
    let at = |s: &[(f64, f64)], snr: f64| s.iter().find(|r| r.0 == snr).map_or(f64::NAN, |r| r.1);
    let f2_30 = at(&f2, 30.0);
    let (f1_10, f1_30) = (at(&f1, 10.0), at(&f1, 30.0));
    let floor_flat = (f1_30 - f1_10).abs() <= F1_FLOOR_REL * f1_10;
    // The floor level depends on the Γ draw. Noiseless runs over several draws
    // show the bias itself.
    let mut biased = Vec::new();
    for seed in 0..F1_GAMMA_DRAWS {
        let mut c = cfg.clone();
        c.phase_error = PhaseErrorConfig::Random { seed: Some(seed) };
        c.estimator.grid_deg.step = F1_GAMMA_GRID_STEP_DEG;
        let s = Scenario::resolve(&c)?;
        let est = pick_estimate(&s.spectrum(&s.clean()?, SpectrumKind::Framework1)?)?;
        let err = (est.theta_hat.to_degrees() - c.theta_true_deg).abs();
        if err > F1_GAMMA_GRID_STEP_DEG / 2.0 {
            biased.push(format!("{seed}:{:.1}", est.theta_hat.to_degrees()));
        }
    }
    let floor = floor_flat && !biased.is_empty();
    let (fast, t) = within_budget(start, scaled_budget(900));
    let fmt = |s: &[(f64, f64)]| {
        s.iter()
            .map(|r| format!("{:.3}", r.1))
            .collect::<Vec<_>>()
            .join(",")
    };
    Ok(outcome(
        mono && f2_30 <= F2_RMSE_MAX_DEG && floor && fast,
        format!(
            "F2 rmse [{}] inversions {inversions:?}; F1 rmse [{}] (10 dB {f1_10:.3}, 30 dB {f1_30:.3}), noiseless F1 biased for Γ draws {} of {F1_GAMMA_DRAWS} [{}]; {t}",
            fmt(&f2),
            fmt(&f1),
            biased.len(),
            biased.join(" ")
        ),
    ))
}

fn read_tree(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in std::fs::read_dir(&p).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn c11_determinism() -> Result<Outcome, Box<dyn std::error::Error>> {
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    for dir in &dirs {
        for e in [Experiment::E1, Experiment::E2, Experiment::E3] {
            run_experiment(e, dir.path())?;
        }
        let mut cfg = presets::e6_scenario();
        cfg.estimator.grid_deg.min = 15.0;
        cfg.estimator.grid_deg.max = 25.0;
        let scn = Scenario::resolve(&cfg)?;
        let table = monte_carlo(&scn, &[0.0, 20.0], 4)?;
        table
            .summary_table()
            .write_csv(&dir.path().join("mc.csv"))?;
        table
            .trials_table()
            .write_csv(&dir.path().join("mc_trials.csv"))?;
    }
    let (a, b) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    let csvs = a.iter().filter(|f| f.0.ends_with(".csv")).count();
    Ok(outcome(
        a == b && csvs > 0,
        format!(
            "{} files ({csvs} CSV) compared byte for byte, identical: {}",
            a.len(),
            a == b
        ),
    ))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(&str, Criterion); 11] = [
        ("hypersphere constraint", c1_hypersphere),
        ("operator algebra", c2_operator_algebra),
        ("derivative validation", c3_derivatives),
        ("monopulse baseline curvature", c4_mp_baseline),
        ("orthogonal synthesis law", c5_synthesis_law),
        ("aperture error ordering", c6_aperture_ordering),
        ("phase-error invariance", c7_invariance),
        ("ambiguity breaking", c8_ambiguity),
        ("spectra", c9_spectra),
        ("monte carlo", c10_monte_carlo),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let o = f().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        if !o.passed {
            failed += 1;
        }
        println!(
            "{} C{id:<2} {name}: {} [{:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
