//! RMSE-versus-SNR sweeps.
//!
//! Trial `k` draws its noise from a seed that depends on the master seed and
//! `k` only, so every SNR level sees the same unit-variance noise scaled to
//! its level, and the phase-error realization stays fixed for the run
//! unless redrawing is requested.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{streams, PhaseErrorConfig};
use super::output::{fmt_f64, Table};
use super::scenario::Scenario;
use crate::estimators::{
    framework1_batch, music_spectrum, observed_curvature, pick_estimate, CurvatureBank,
    ObservedVelocity, Spectrum, SpectrumKind,
};
use crate::synthesis::{
    add_noise, apply_phase_error, derive_seed, synthesize, NoiseModel, PhaseErrorModel, Trajectory,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseRow {
    pub snr_db: f64,
    pub estimator: SpectrumKind,
    pub phase_error: bool,
    /// Over successful trials, from the signed error `θ̂ − θ`.
    pub rmse_deg: f64,
    /// From `min(|θ̂ − θ|, |θ̂ + θ|)`, i.e. ignoring the sign of the angle.
    pub rmse_symmetric_deg: f64,
    pub n_trials: usize,
    pub n_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub snr_db: f64,
    pub estimator: SpectrumKind,
    pub trial: usize,
    /// `None` when the spectrum was invalid.
    pub theta_hat_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RmseTable {
    pub rows: Vec<RmseRow>,
    pub trials: Vec<TrialRecord>,
}

impl RmseTable {
    pub fn row(&self, snr_db: f64, estimator: SpectrumKind) -> Option<&RmseRow> {
        self.rows
            .iter()
            .find(|r| r.snr_db == snr_db && r.estimator == estimator)
    }

    /// RMSE column for one estimator, in SNR order.
    pub fn series(&self, estimator: SpectrumKind) -> Vec<(f64, f64)> {
        let mut v: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.estimator == estimator)
            .map(|r| (r.snr_db, r.rmse_deg))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new([
            "snr_db",
            "estimator",
            "phase_error",
            "rmse_deg",
            "rmse_symmetric_deg",
            "n_trials",
            "n_failures",
        ]);
        for r in &self.rows {
            t.push(vec![
                fmt_f64(r.snr_db),
                r.estimator.to_string(),
                r.phase_error.to_string(),
                fmt_f64(r.rmse_deg),
                fmt_f64(r.rmse_symmetric_deg),
                r.n_trials.to_string(),
                r.n_failures.to_string(),
            ]);
        }
        t
    }

    pub fn trials_table(&self) -> Table {
        let mut t = Table::new(["snr_db", "estimator", "trial", "theta_hat_deg"]);
        for r in &self.trials {
            t.push(vec![
                fmt_f64(r.snr_db),
                r.estimator.to_string(),
                r.trial.to_string(),
                r.theta_hat_deg.map(fmt_f64).unwrap_or_default(),
            ]);
        }
        t
    }
}

fn rms(errors: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for e in errors {
        s += e * e;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        (s / n as f64).sqrt()
    }
}

fn estimate_deg(spec: &Spectrum) -> Result<Option<f64>> {
    match pick_estimate(spec) {
        Ok(e) => Ok(Some(e.theta_hat.to_degrees())),
        Err(Error::InvalidSpectrum) => Ok(None),
        Err(e) => Err(e),
    }
}

fn trial_gains(scn: &Scenario, trial: usize) -> Option<PhaseErrorModel> {
    let redraw = scn.config.monte_carlo.redraw_phase_error
        && matches!(scn.config.phase_error, PhaseErrorConfig::Random { .. });
    if redraw {
        let seed = derive_seed(
            scn.config.master_seed,
            streams::PHASE_ERROR,
            trial as u64 + 1,
        );
        Some(PhaseErrorModel::random(scn.geometry.len(), seed))
    } else {
        scn.phase_error.clone()
    }
}

/// Runs `n_trials` noisy observations per SNR through each configured
/// estimator.
pub fn monte_carlo(scn: &Scenario, snr_list: &[f64], n_trials: usize) -> Result<RmseTable> {
    if n_trials == 0 {
        return Err(crate::error::invalid("n_trials", "need at least one trial"));
    }
    let estimators = &scn.config.monte_carlo.estimators;
    let base = synthesize(&scn.model, &scn.geometry, scn.theta_true, &scn.sampling)?;
    let apply = |g: Option<PhaseErrorModel>| -> Result<Trajectory> {
        match g {
            Some(g) => apply_phase_error(&base, &g),
            None => Ok(base.clone()),
        }
    };
    let redraw = scn.config.monte_carlo.redraw_phase_error;
    let clean: Vec<Trajectory> = if redraw {
        (0..n_trials)
            .map(|k| apply(trial_gains(scn, k)))
            .collect::<Result<_>>()?
    } else {
        vec![apply(scn.phase_error.clone())?]
    };
    let bank = if estimators.contains(&SpectrumKind::Framework2) {
        Some(CurvatureBank::build(
            &scn.model,
            &scn.geometry,
            &scn.sampling,
            &scn.grid,
            &scn.estimator,
        )?)
    } else {
        None
    };
    let theta_deg = scn.config.theta_true_deg;
    let flag = scn.phase_error.is_some();
    let mut table = RmseTable::default();

    for &snr in snr_list {
        let observations: Vec<Trajectory> = (0..n_trials)
            .into_par_iter()
            .map(|k| {
                let noise = NoiseModel {
                    snr_db: Some(snr),
                    seed: scn.noise_seed(k as u64),
                };
                add_noise(&clean[if redraw { k } else { 0 }], &noise)
            })
            .collect();

        for &kind in estimators {
            let estimates: Vec<Option<f64>> = match kind {
                SpectrumKind::Framework1 => {
                    let vel = observations
                        .par_iter()
                        .map(|o| ObservedVelocity::from_trajectory(o, &scn.estimator.sg))
                        .collect::<Result<Vec<_>>>()?;
                    framework1_batch(&vel, &scn.model, &scn.geometry, &scn.grid)?
                        .iter()
                        .map(estimate_deg)
                        .collect::<Result<_>>()?
                }
                SpectrumKind::Framework2 => {
                    let bank = bank.as_ref().expect("built above");
                    observations
                        .par_iter()
                        .map(|o| {
                            let spec = if bank.valid {
                                bank.spectrum(
                                    &observed_curvature(o, &scn.estimator)?,
                                    scn.estimator.weights,
                                )?
                            } else {
                                bank.spectrum(
                                    &crate::geometry::CurvatureSeries::empty(),
                                    scn.estimator.weights,
                                )?
                            };
                            estimate_deg(&spec)
                        })
                        .collect::<Result<_>>()?
                }
                SpectrumKind::Music => observations
                    .par_iter()
                    .map(|o| {
                        estimate_deg(&music_spectrum(
                            o,
                            &scn.geometry,
                            scn.model.carrier_omega(),
                            &scn.grid,
                        )?)
                    })
                    .collect::<Result<_>>()?,
            };
            let ok = || estimates.iter().flatten();
            table.rows.push(RmseRow {
                snr_db: snr,
                estimator: kind,
                phase_error: flag,
                rmse_deg: rms(ok().map(|e| e - theta_deg)),
                rmse_symmetric_deg: rms(
                    ok().map(|e| (e - theta_deg).abs().min((e + theta_deg).abs()))
                ),
                n_trials,
                n_failures: estimates.iter().filter(|e| e.is_none()).count(),
            });
            table
                .trials
                .extend(estimates.iter().enumerate().map(|(trial, &e)| TrialRecord {
                    snr_db: snr,
                    estimator: kind,
                    trial,
                    theta_hat_deg: e,
                }));
        }
    }
    Ok(table)
}

/// Sidecar metadata for a Monte Carlo run.
pub fn describe_run(scn: &Scenario, snr_list: &[f64], n_trials: usize) -> serde_json::Value {
    json!({
        "scenario": scn.describe(),
        "snr_db": snr_list,
        "n_trials": n_trials,
        "noise_seeds": "derive_seed(master_seed, 1, trial), shared across SNR levels",
    })
}
