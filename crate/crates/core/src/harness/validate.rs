//! Self-check suite over the library's invariants.

use num_complex::Complex64;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::Check;
use crate::array::{half_wavelength, ArrayGeometry, DelayReference};
use crate::generator::{
    ambiguity_residual, analytic_derivatives, anti_hermitian_residual, build_operator_stack, jerk,
    jerk_literal, norm, odd_even_residual, re_dot,
};
use crate::geometry::{curvature_series, frenet_frame};
use crate::linalg::hermitian_eigen;
use crate::sg::{SavitzkyGolay, SgConfig};
use crate::signal::SignalModel;
use crate::synthesis::{apply_phase_error, default_dt, synthesize, PhaseErrorModel, SamplingGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn models() -> [(&'static str, SignalModel); 3] {
    [
        ("mp", SignalModel::mp()),
        ("lfm", SignalModel::lfm()),
        ("sfm", SignalModel::sfm()),
    ]
}

fn d() -> f64 {
    half_wavelength(crate::signal::defaults::CARRIER_FREQ)
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn check(out: &mut Vec<Check>, name: &str, value: f64, tol: f64) {
    out.push(Check::new(
        name,
        value < tol,
        format!("{value:e} (tolerance {tol:e})"),
    ));
}

fn run(out: &mut Vec<Check>, name: &str, f: impl FnOnce(&mut Vec<Check>) -> Result<()>) {
    if let Err(e) = f(out) {
        out.push(Check::new(name, false, format!("error: {e}")));
    }
}

/// Runs every check; never panics on a failing check.
pub fn validate() -> ValidationReport {
    let mut checks = Vec::new();
    let theta = 30f64.to_radians();

    run(&mut checks, "hypersphere", |out| {
        for (name, model) in models() {
            let dt = default_dt(&model, 32.0);
            for coords in [
                &[0.0, 5.0][..],
                &[0.0, 5.0, 10.0],
                &[0.0, 1.0, 3.0, 7.0, 12.0],
            ] {
                let g = ArrayGeometry::linear(coords, d(), DelayReference::FirstElement)?;
                let grid = SamplingGrid::new(20e-9, dt, 2000)?;
                let x = synthesize(&model, &g, theta, &grid)?;
                let r = (coords.len() as f64).sqrt();
                let dev = worst((0..x.len()).map(|n| (x.sample_norm(n) - r).abs() / r));
                check(
                    out,
                    &format!("hypersphere {name} M={}", coords.len()),
                    dev,
                    1e-9,
                );
            }
        }
        Ok(())
    });

    run(&mut checks, "operator algebra", |out| {
        let g = ArrayGeometry::linear(&[0.0, 5.0, 10.0], d(), DelayReference::FirstElement)?;
        for (name, model) in models() {
            let grid = SamplingGrid::new(20e-9, default_dt(&model, 32.0), 1500)?;
            let ops = build_operator_stack(&model, &g, theta, &grid)?;
            let x = synthesize(&model, &g, theta, &grid)?;
            check(
                out,
                &format!("anti-hermitian generator {name}"),
                anti_hermitian_residual(&ops),
                1e-12,
            );
            let (mut orth, mut jerk_gap) = (0.0f64, 0.0f64);
            for n in 0..ops.len() {
                let col = x.column(n);
                let at = ops.at(n);
                orth = orth.max(odd_even_residual(&col, at.omega));
                let (a, b) = (jerk(&col, &at), jerk_literal(&col, &at));
                let diff: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
                jerk_gap = jerk_gap.max(norm(&diff) / norm(&a));
            }
            check(
                out,
                &format!("odd/even operator powers orthogonal {name}"),
                orth,
                1e-9,
            );
            check(out, &format!("jerk forms agree {name}"), jerk_gap, 1e-12);
        }
        Ok(())
    });

    run(&mut checks, "savitzky-golay", |out| {
        let sg = SavitzkyGolay::new(SgConfig::default())?;
        let dt = 0.01;
        let series: Vec<f64> = (0..200)
            .map(|i| (i as f64 * dt).powi(7) - 3.0 * (i as f64 * dt).powi(2))
            .collect();
        let want = |t: f64| 42.0 * t.powi(5) - 6.0;
        let got = sg.apply_real(&series, 2, dt)?;
        let h = sg.config().half();
        let err = worst(got.iter().enumerate().map(|(i, v)| {
            let w = want((i + h) as f64 * dt);
            (v - w).abs() / w.abs().max(1.0)
        }));
        check(
            out,
            "savitzky-golay exact on degree-7 polynomial",
            err,
            1e-8,
        );
        Ok(())
    });

    run(&mut checks, "phase error invariance", |out| {
        let model = SignalModel::lfm();
        let g = ArrayGeometry::linear(&[0.0, 5.0, 10.0], d(), DelayReference::FirstElement)?;
        let grid = SamplingGrid::new(20e-9, default_dt(&model, 32.0), 1500)?;
        let stack = analytic_derivatives(&model, &g, theta, &grid, 3)?;
        let base = curvature_series(&stack)?;
        let frame = frenet_frame(&stack)?;
        let (mut dk, mut du) = (0.0f64, 0.0f64);
        for seed in 0..5 {
            let gamma = PhaseErrorModel::random(3, seed);
            let gains = gamma.gains();
            let rot = stack.rotated(&gains);
            let s = curvature_series(&rot)?;
            let f = frenet_frame(&rot)?;
            for n in 0..s.kappa1.len() {
                dk = dk.max((s.kappa1[n] - base.kappa1[n]).abs() / base.kappa1[n]);
                let (a, b) = (s.kappa2[n].unwrap_or(0.0), base.kappa2[n].unwrap_or(0.0));
                dk = dk.max((a - b).abs() / b.abs().max(1e-300));
                let gu1: Vec<Complex64> = frame.samples[n]
                    .u1
                    .iter()
                    .zip(&gains)
                    .map(|(u, g)| u * g)
                    .collect();
                let diff: Vec<Complex64> = gu1
                    .iter()
                    .zip(&f.samples[n].u1)
                    .map(|(p, q)| p - q)
                    .collect();
                du = du.max(norm(&diff));
            }
            // The trajectory itself is rotated element-wise.
            let x = synthesize(&model, &g, theta, &grid)?;
            let y = apply_phase_error(&x, &gamma)?;
            du = du.max((y.sample_norm(0) - x.sample_norm(0)).abs());
        }
        check(out, "curvatures invariant under phase error", dk, 1e-9);
        check(out, "frame transforms with phase error", du, 1e-9);
        Ok(())
    });

    run(&mut checks, "frame", |out| {
        let model = SignalModel::sfm();
        let g = ArrayGeometry::linear(&[0.0, 5.0, 10.0], d(), DelayReference::FirstElement)?;
        let grid = SamplingGrid::new(20e-9, default_dt(&model, 32.0), 1500)?;
        let frame = frenet_frame(&analytic_derivatives(&model, &g, theta, &grid, 3)?)?;
        let mut dev = 0.0f64;
        for s in &frame.samples {
            let (Some(u2), Some(u3)) = (&s.u2, &s.u3) else {
                continue;
            };
            for (a, b, want) in [
                (&s.u1, &s.u1, 1.0),
                (u2, u2, 1.0),
                (u3, u3, 1.0),
                (&s.u1, u2, 0.0),
                (&s.u1, u3, 0.0),
                (u2, u3, 0.0),
            ] {
                dev = dev.max((re_dot(a, b) - want).abs());
            }
        }
        check(out, "frenet frame orthonormal", dev, 1e-8);
        Ok(())
    });

    run(&mut checks, "delays", |out| {
        let c = ArrayGeometry::linear(&[0.0, 1.0, 4.0, 9.0], d(), DelayReference::Centroid)?;
        let sum: f64 = c.delays(theta).iter().sum();
        check(
            out,
            "centroid delays sum to zero",
            sum.abs() / c.max_delay_bound(),
            1e-12,
        );
        let f = c.with_reference(DelayReference::FirstElement);
        let shifted = f.translated([3.0, -2.0, 0.5]);
        let gap = worst(
            f.delays(theta)
                .iter()
                .zip(shifted.delays(theta))
                .map(|(a, b)| (a - b).abs()),
        );
        check(
            out,
            "first-element delays translation invariant",
            gap / f.max_delay_bound(),
            1e-12,
        );
        Ok(())
    });

    run(&mut checks, "ambiguity", |out| {
        let g = ArrayGeometry::linear(&[0.0, 5.0, 10.0], d(), DelayReference::FirstElement)?;
        let lobes = g.grating_lobe_angles(theta, SignalModel::mp().carrier_omega())?;
        let other = lobes
            .iter()
            .copied()
            .find(|l| (l - theta).abs() > 1e-3)
            .ok_or_else(|| crate::error::invalid("lobes", "no grating lobe found"))?;
        for (name, model, want_small) in [
            ("mp", SignalModel::mp(), true),
            ("lfm", SignalModel::lfm(), false),
        ] {
            let grid = SamplingGrid::new(20e-9, default_dt(&model, 32.0), 1500)?;
            let rel = worst(ambiguity_residual(&model, &g, theta, other, &grid)?.relative());
            if want_small {
                check(
                    out,
                    &format!("aliased velocities coincide {name}"),
                    rel,
                    1e-9,
                );
            } else {
                out.push(Check::new(
                    &format!("aliased velocities separate {name}"),
                    rel > 1e-3,
                    format!("{rel:e} (threshold 1e-3)"),
                ));
            }
        }
        Ok(())
    });

    run(&mut checks, "eigensolver", |out| {
        let n = 4;
        let a: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
                let im = if i < j {
                    0.3 * hi
                } else if i > j {
                    -0.3 * hi
                } else {
                    0.0
                };
                Complex64::new(1.0 / (1.0 + lo + hi), im)
            })
            .collect();
        let e = hermitian_eigen(&a, n);
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let r: Complex64 = (0..n)
                    .map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j].conj())
                    .sum();
                err = err.max((r - a[i * n + j]).norm());
            }
        }
        check(out, "hermitian eigen reconstruction", err, 1e-12);
        Ok(())
    });

    let corrupted = r#"{"signal": {"kind": "lfm"}, "geometry": {"positions_d": [0, 5, 10]},
        "theta_true_deg": 20, "estimator": {"sg": {"window": 20, "polyorder": 7, "max_deriv": 3}}}"#;
    let surfaced = matches!(
        ScenarioConfig::from_json(corrupted),
        Err(Error::Config { ref path, .. }) if path == "estimator.sg.window"
    );
    checks.push(Check::new(
        "even filter window reported as a config error",
        surfaced,
        "estimator.sg.window = 20".into(),
    ));

    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
