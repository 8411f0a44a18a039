//! A validated configuration turned into library objects.

use serde_json::json;

use super::config::{streams, ScenarioConfig};
use crate::array::ArrayGeometry;
use crate::estimators::{
    framework1_spectrum, framework2_spectrum, music_spectrum, EstimatorConfig, Spectrum,
    SpectrumKind, ThetaGrid,
};
use crate::signal::SignalModel;
use crate::synthesis::{
    add_noise, apply_phase_error, delay_extremes, derive_seed, synthesize, NoiseModel,
    PhaseErrorModel, SamplingGrid, Trajectory,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Scenario {
    /// Materialized configuration.
    pub config: ScenarioConfig,
    pub model: SignalModel,
    pub geometry: ArrayGeometry,
    pub theta_true: f64,
    pub phase_error: Option<PhaseErrorModel>,
    pub sampling: SamplingGrid,
    pub estimator: EstimatorConfig,
    pub grid: ThetaGrid,
}

impl Scenario {
    /// Validates `config` and derives the observation window. The window is
    /// the span over which every element sees the pulse for the true angle
    /// and for every candidate on the scan grid, so model trajectories for
    /// all candidates share the observation's samples.
    pub fn resolve(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let config = config.materialized();
        let model = config.signal_model()?;
        let geometry = config.array()?;
        let grid = config.theta_grid()?;
        let theta_true = config.theta_true_deg.to_radians();
        let dt = config.sampling.dt_s.expect("materialized");
        let extremes = delay_extremes(&geometry, grid.points().into_iter().chain([theta_true]));
        let sampling = SamplingGrid::for_delays(&model, extremes, config.sampling.margin_s, dt)
            .map_err(|e| Error::Config {
                path: "geometry".into(),
                message: e.to_string(),
            })?;
        let need = config.estimator.sg.window;
        if sampling.n_samples < need {
            return Err(Error::Config {
                path: "sampling".into(),
                message: format!(
                    "window holds {} samples but the filter needs {need}",
                    sampling.n_samples
                ),
            });
        }
        Ok(Self {
            phase_error: config.phase_error_model(),
            estimator: config.estimator_config(),
            config,
            model,
            geometry,
            theta_true,
            sampling,
            grid,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::resolve(&ScenarioConfig::from_json(text)?)
    }

    pub fn noise_seed(&self, trial: u64) -> u64 {
        derive_seed(self.config.master_seed, streams::NOISE, trial)
    }

    /// Noiseless observation including the configured phase error.
    pub fn clean(&self) -> Result<Trajectory> {
        let x = synthesize(&self.model, &self.geometry, self.theta_true, &self.sampling)?;
        match &self.phase_error {
            Some(g) => apply_phase_error(&x, g),
            None => Ok(x),
        }
    }

    /// Observation for a given trial index at the configured SNR.
    pub fn observe(&self, trial: u64) -> Result<Trajectory> {
        let noise = NoiseModel {
            snr_db: self.config.snr_db,
            seed: self.noise_seed(trial),
        };
        Ok(add_noise(&self.clean()?, &noise))
    }

    pub fn spectrum(&self, obs: &Trajectory, kind: SpectrumKind) -> Result<Spectrum> {
        match kind {
            SpectrumKind::Framework1 => framework1_spectrum(
                obs,
                &self.model,
                &self.geometry,
                &self.grid,
                &self.estimator,
            ),
            SpectrumKind::Framework2 => framework2_spectrum(
                obs,
                &self.model,
                &self.geometry,
                &self.grid,
                &self.estimator,
            ),
            SpectrumKind::Music => {
                music_spectrum(obs, &self.geometry, self.model.carrier_omega(), &self.grid)
            }
        }
    }

    /// Everything needed to reproduce a run, for JSON sidecars.
    pub fn describe(&self) -> serde_json::Value {
        let x: Vec<f64> = self.geometry.positions().iter().map(|p| p[0]).collect();
        json!({
            "config": self.config.to_json_value(),
            "derived": {
                "positions_m": x,
                "t_start_s": self.sampling.t_start,
                "dt_s": self.sampling.dt,
                "n_samples": self.sampling.n_samples,
                "grid_points": self.grid.len(),
                "noise_seed_trial0": self.config.snr_db.map(|_| self.noise_seed(0)),
                "phase_errors_rad": self.phase_error.as_ref().map(|g| g.phases.clone()),
            }
        })
    }
}
