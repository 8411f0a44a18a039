//! JSON scenario files.
//!
//! Parsing is strict: unknown keys are rejected and every error names the
//! offending key path. [`ScenarioConfig::materialized`] fills in all defaults so
//! the resolved copy written next to each output fully describes the run.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::array::{half_wavelength, ArrayGeometry, DelayReference};
use crate::estimators::{EstimatorConfig, ModelDerivatives, SpectrumKind, ThetaGrid};
use crate::sg::SgConfig;
use crate::signal::{defaults, SignalModel, Support, Waveform};
use crate::synthesis::{derive_seed, PhaseErrorModel};
use crate::{Error, Result};

/// Seed streams split off `master_seed`.
pub mod streams {
    pub const NOISE: u64 = 1;
    pub const PHASE_ERROR: u64 = 2;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub signal: SignalConfig,
    pub geometry: GeometryConfig,
    pub theta_true_deg: f64,
    /// Per-element SNR in dB; `null` or `"none"` for a noiseless run.
    #[serde(default, with = "snr_serde")]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub phase_error: PhaseErrorConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformKind {
    Mp,
    Lfm,
    Sfm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: WaveformKind,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_pulse")]
    pub pulse_width_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mod_freq_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mod_index: Option<f64>,
    #[serde(default)]
    pub support: Support,
}

fn default_carrier() -> f64 {
    defaults::CARRIER_FREQ
}

fn default_pulse() -> f64 {
    defaults::PULSE_WIDTH
}

impl SignalConfig {
    pub fn new(kind: WaveformKind) -> Self {
        Self {
            kind,
            carrier_hz: defaults::CARRIER_FREQ,
            pulse_width_s: defaults::PULSE_WIDTH,
            bandwidth_hz: None,
            mod_freq_hz: None,
            mod_index: None,
            support: Support::Pulse,
        }
    }
}

/// Linear array along x. Exactly one of the position forms must be given;
/// `d` is half the carrier wavelength.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_d: Option<Vec<f64>>,
    /// Consecutive spacings in `d`; the first element sits at the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps_d: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_m: Option<Vec<f64>>,
    #[serde(default)]
    pub reference: DelayReference,
}

impl GeometryConfig {
    pub fn positions_d(coords: &[f64], reference: DelayReference) -> Self {
        Self {
            positions_d: Some(coords.to_vec()),
            reference,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseErrorConfig {
    #[default]
    None,
    /// Uniform phases on `[−π, π)`; the seed defaults to one derived from
    /// `master_seed`.
    Random {
        #[serde(default)]
        seed: Option<u64>,
    },
    Explicit {
        phases_rad: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    /// `dt = 1 / (oversampling · f_max)` unless `dt_s` is set.
    pub oversampling: f64,
    pub dt_s: Option<f64>,
    /// Extra clearance kept from the pulse edges at both window ends.
    pub margin_s: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            oversampling: 32.0,
            dt_s: None,
            margin_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDeg {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for GridDeg {
    fn default() -> Self {
        Self {
            min: -90.0,
            max: 90.0,
            step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSettings {
    pub grid_deg: GridDeg,
    pub sg: SgConfig,
    pub weights: [f64; 2],
    pub model_derivatives: ModelDerivatives,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        let e = EstimatorConfig::default();
        Self {
            grid_deg: GridDeg::default(),
            sg: e.sg,
            weights: e.weights,
            model_derivatives: e.model_derivatives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub snr_db: Vec<f64>,
    pub estimators: Vec<SpectrumKind>,
    /// Draw a fresh phase-error realization per trial instead of fixing it
    /// for the run. Only meaningful with `phase_error.mode = "random"`.
    pub redraw_phase_error: bool,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            snr_db: (0..9).map(|i| -10.0 + 5.0 * i as f64).collect(),
            estimators: vec![SpectrumKind::Framework1, SpectrumKind::Framework2],
            redraw_phase_error: false,
        }
    }
}

mod snr_serde {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("none"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<f64>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Number(x)) => Ok(Some(x)),
            Some(Raw::Text(t)) if t.eq_ignore_ascii_case("none") => Ok(None),
            Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!(
                "expected a number, null or \"none\", got \"{t}\""
            ))),
        }
    }
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(config_err(
            path,
            format!("must be finite and positive, got {x}"),
        ))
    }
}

impl ScenarioConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(
                if path.is_empty() { "." } else { &path },
                e.into_inner().to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is always serializable")
    }

    /// Semantic checks that the schema alone cannot express.
    pub fn validate(&self) -> Result<()> {
        let s = &self.signal;
        positive("signal.carrier_hz", s.carrier_hz)?;
        positive("signal.pulse_width_s", s.pulse_width_s)?;
        let misplaced = match s.kind {
            WaveformKind::Mp => [
                ("signal.bandwidth_hz", s.bandwidth_hz),
                ("signal.mod_freq_hz", s.mod_freq_hz),
                ("signal.mod_index", s.mod_index),
            ]
            .into_iter()
            .find(|(_, v)| v.is_some()),
            WaveformKind::Lfm => [
                ("signal.mod_freq_hz", s.mod_freq_hz),
                ("signal.mod_index", s.mod_index),
            ]
            .into_iter()
            .find(|(_, v)| v.is_some()),
            WaveformKind::Sfm => {
                Some(("signal.bandwidth_hz", s.bandwidth_hz)).filter(|(_, v)| v.is_some())
            }
        };
        if let Some((path, _)) = misplaced {
            return Err(config_err(
                path,
                format!("not a parameter of the {:?} waveform", s.kind),
            ));
        }
        if let Some(b) = s.bandwidth_hz {
            if !b.is_finite() {
                return Err(config_err("signal.bandwidth_hz", "must be finite"));
            }
        }
        if let Some(f) = s.mod_freq_hz {
            if !(f.is_finite() && f >= 0.0) {
                return Err(config_err(
                    "signal.mod_freq_hz",
                    "must be finite and non-negative",
                ));
            }
        }
        if let Some(b) = s.mod_index {
            if !b.is_finite() {
                return Err(config_err("signal.mod_index", "must be finite"));
            }
        }

        let g = &self.geometry;
        let given: Vec<(&str, &Vec<f64>)> = [
            ("geometry.positions_d", g.positions_d.as_ref()),
            ("geometry.gaps_d", g.gaps_d.as_ref()),
            ("geometry.positions_m", g.positions_m.as_ref()),
        ]
        .into_iter()
        .filter_map(|(p, v)| v.map(|v| (p, v)))
        .collect();
        match given.as_slice() {
            [] => {
                return Err(config_err(
                    "geometry",
                    "one of positions_d, gaps_d or positions_m is required",
                ))
            }
            [(path, v)] => {
                let need = if path.ends_with("gaps_d") { 1 } else { 2 };
                if v.len() < need {
                    return Err(config_err(path, "an array needs at least two elements"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(config_err(path, "coordinates must be finite"));
                }
                if path.ends_with("gaps_d") && v.iter().any(|x| *x <= 0.0) {
                    return Err(config_err(path, "gaps must be positive"));
                }
            }
            _ => {
                return Err(config_err(
                    "geometry",
                    "give exactly one of positions_d, gaps_d or positions_m",
                ))
            }
        }
        let m = self.element_count();

        if !(self.theta_true_deg.is_finite() && self.theta_true_deg.abs() <= 90.0) {
            return Err(config_err("theta_true_deg", "must lie in [-90, 90]"));
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return Err(config_err("snr_db", "must be a number"));
            }
        }
        if let PhaseErrorConfig::Explicit { phases_rad } = &self.phase_error {
            if phases_rad.len() != m {
                return Err(config_err(
                    "phase_error.phases_rad",
                    format!(
                        "expected {m} phases, one per element, got {}",
                        phases_rad.len()
                    ),
                ));
            }
            if phases_rad.iter().any(|p| !p.is_finite()) {
                return Err(config_err(
                    "phase_error.phases_rad",
                    "phases must be finite",
                ));
            }
        }

        positive("sampling.oversampling", self.sampling.oversampling)?;
        if let Some(dt) = self.sampling.dt_s {
            positive("sampling.dt_s", dt)?;
        }
        if !(self.sampling.margin_s.is_finite() && self.sampling.margin_s >= 0.0) {
            return Err(config_err(
                "sampling.margin_s",
                "must be finite and non-negative",
            ));
        }

        let e = &self.estimator;
        let gd = e.grid_deg;
        positive("estimator.grid_deg.step", gd.step)?;
        if !(gd.min.is_finite()
            && gd.max.is_finite()
            && gd.min >= -90.0
            && gd.max <= 90.0
            && gd.min <= gd.max)
        {
            return Err(config_err(
                "estimator.grid_deg",
                "need -90 <= min <= max <= 90",
            ));
        }
        let sg = e.sg;
        if sg.window < 3 || sg.window.is_multiple_of(2) {
            return Err(config_err(
                "estimator.sg.window",
                format!("must be odd and at least 3, got {}", sg.window),
            ));
        }
        if sg.polyorder >= sg.window {
            return Err(config_err(
                "estimator.sg.polyorder",
                "must be below the window length",
            ));
        }
        if sg.polyorder < 3 {
            return Err(config_err(
                "estimator.sg.polyorder",
                "curvature and torsion need at least 3",
            ));
        }
        if sg.max_deriv > sg.polyorder {
            return Err(config_err(
                "estimator.sg.max_deriv",
                "must not exceed polyorder",
            ));
        }
        if e.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || e.weights.iter().all(|w| *w == 0.0)
        {
            return Err(config_err(
                "estimator.weights",
                "weights must be non-negative with at least one positive",
            ));
        }

        if self.monte_carlo.trials == 0 {
            return Err(config_err("monte_carlo.trials", "need at least one trial"));
        }
        if self.monte_carlo.snr_db.iter().any(|s| s.is_nan()) {
            return Err(config_err("monte_carlo.snr_db", "entries must be numbers"));
        }
        Ok(())
    }

    fn element_count(&self) -> usize {
        let g = &self.geometry;
        g.positions_d
            .as_ref()
            .or(g.positions_m.as_ref())
            .map(Vec::len)
            .or(g.gaps_d.as_ref().map(|v| v.len() + 1))
            .unwrap_or(0)
    }

    /// Copy with every optional parameter replaced by the value actually used.
    pub fn materialized(&self) -> Self {
        let mut out = self.clone();
        let s = &mut out.signal;
        match s.kind {
            WaveformKind::Mp => {}
            WaveformKind::Lfm => {
                s.bandwidth_hz.get_or_insert(defaults::LFM_BANDWIDTH);
            }
            WaveformKind::Sfm => {
                s.mod_freq_hz.get_or_insert(defaults::SFM_MOD_FREQ);
                s.mod_index.get_or_insert(defaults::SFM_MOD_INDEX);
            }
        }
        if let PhaseErrorConfig::Random { seed } = &mut out.phase_error {
            seed.get_or_insert(derive_seed(self.master_seed, streams::PHASE_ERROR, 0));
        }
        if out.sampling.dt_s.is_none() {
            let model = out.signal_model().expect("validated");
            out.sampling.dt_s = Some(crate::synthesis::default_dt(
                &model,
                out.sampling.oversampling,
            ));
        }
        out
    }

    pub fn signal_model(&self) -> Result<SignalModel> {
        let s = &self.signal;
        let waveform = match s.kind {
            WaveformKind::Mp => Waveform::Mp,
            WaveformKind::Lfm => Waveform::Lfm {
                bandwidth: s.bandwidth_hz.unwrap_or(defaults::LFM_BANDWIDTH),
            },
            WaveformKind::Sfm => Waveform::Sfm {
                mod_freq: s.mod_freq_hz.unwrap_or(defaults::SFM_MOD_FREQ),
                mod_index: s.mod_index.unwrap_or(defaults::SFM_MOD_INDEX),
            },
        };
        Ok(SignalModel::new(waveform, s.carrier_hz, s.pulse_width_s)
            .map_err(|e| config_err("signal", e.to_string()))?
            .with_support(s.support))
    }

    pub fn array(&self) -> Result<ArrayGeometry> {
        let g = &self.geometry;
        let d = half_wavelength(self.signal.carrier_hz);
        let built = if let Some(p) = &g.positions_d {
            ArrayGeometry::linear(p, d, g.reference)
        } else if let Some(gaps) = &g.gaps_d {
            ArrayGeometry::from_gaps(gaps, d, g.reference)
        } else if let Some(p) = &g.positions_m {
            ArrayGeometry::linear(p, 1.0, g.reference)
        } else {
            return Err(config_err("geometry", "no element positions"));
        };
        built.map_err(|e| config_err("geometry", e.to_string()))
    }

    pub fn theta_grid(&self) -> Result<ThetaGrid> {
        let g = self.estimator.grid_deg;
        ThetaGrid::from_degrees(g.min, g.max, g.step)
            .map_err(|e| config_err("estimator.grid_deg", e.to_string()))
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            sg: self.estimator.sg,
            weights: self.estimator.weights,
            model_derivatives: self.estimator.model_derivatives,
        }
    }

    /// Fixed phase-error realization, or `None` without one.
    pub fn phase_error_model(&self) -> Option<PhaseErrorModel> {
        let m = self.element_count();
        match &self.phase_error {
            PhaseErrorConfig::None => None,
            PhaseErrorConfig::Random { seed } => Some(PhaseErrorModel::random(
                m,
                seed.unwrap_or_else(|| derive_seed(self.master_seed, streams::PHASE_ERROR, 0)),
            )),
            PhaseErrorConfig::Explicit { phases_rad } => {
                Some(PhaseErrorModel::explicit(phases_rad.clone()))
            }
        }
    }

    /// Builder used by the presets: defaults everywhere except the essentials.
    pub fn basic(kind: WaveformKind, geometry: GeometryConfig, theta_true_deg: f64) -> Self {
        Self {
            signal: SignalConfig::new(kind),
            geometry,
            theta_true_deg,
            snr_db: None,
            phase_error: PhaseErrorConfig::None,
            sampling: SamplingConfig::default(),
            estimator: EstimatorSettings::default(),
            monte_carlo: MonteCarloConfig::default(),
            master_seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "signal": {"kind": "lfm"},
        "geometry": {"positions_d": [0, 5, 10]},
        "theta_true_deg": 20
    }"#;

    fn err_path(text: &str) -> String {
        match ScenarioConfig::from_json(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ScenarioConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.snr_db, None);
        assert_eq!(cfg.estimator.sg, SgConfig::default());
        let full = cfg.materialized();
        assert_eq!(full.signal.bandwidth_hz, Some(800e6));
        let dt = full.sampling.dt_s.unwrap();
        assert!((dt - 1.0 / (32.0 * 2.8e9)).abs() < 1e-24);
    }

    #[test]
    fn materialized_config_round_trips() {
        let mut cfg = ScenarioConfig::from_json(MINIMAL).unwrap();
        cfg.phase_error = PhaseErrorConfig::Random { seed: None };
        let full = cfg.materialized();
        let text = serde_json::to_string(&full).unwrap();
        let back = ScenarioConfig::from_json(&text).unwrap();
        assert_eq!(back, full);
        assert_eq!(back.materialized(), full);
        assert_eq!(cfg.phase_error_model(), full.phase_error_model());
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let text = MINIMAL.replace(r#""kind": "lfm""#, r#""kind": "lfm", "bandwith_hz": 1"#);
        assert_eq!(err_path(&text), "signal.bandwith_hz");
        let text = MINIMAL.replace("\"theta_true_deg\": 20", "\"theta_true_deg\": 20, \"estimator\": {\"sg\": {\"window\": 21, \"polyorder\": 7, \"max_deriv\": 3, \"x\": 1}}");
        assert_eq!(err_path(&text), "estimator.sg.x");
    }

    #[test]
    fn type_errors_report_their_path() {
        let text = MINIMAL.replace("[0, 5, 10]", "[0, \"five\", 10]");
        assert_eq!(err_path(&text), "geometry.positions_d[1]");
    }

    #[test]
    fn even_window_is_a_config_error() {
        let text = MINIMAL.replace(
            "\"theta_true_deg\": 20",
            "\"theta_true_deg\": 20, \"estimator\": {\"sg\": {\"window\": 20, \"polyorder\": 7, \"max_deriv\": 3}}",
        );
        assert_eq!(err_path(&text), "estimator.sg.window");
    }

    #[test]
    fn semantic_errors() {
        let text = MINIMAL.replace("\"lfm\"", "\"mp\", \"bandwidth_hz\": 1e6");
        assert_eq!(err_path(&text), "signal.bandwidth_hz");
        let text = MINIMAL.replace(
            "\"positions_d\": [0, 5, 10]",
            "\"positions_d\": [0, 5], \"gaps_d\": [5]",
        );
        assert_eq!(err_path(&text), "geometry");
        let text = MINIMAL.replace("20\n", "120\n");
        assert_eq!(err_path(&text), "theta_true_deg");
        let text = MINIMAL.replace(
            "\"theta_true_deg\": 20",
            "\"theta_true_deg\": 20, \"phase_error\": {\"mode\": \"explicit\", \"phases_rad\": [0.1]}",
        );
        assert_eq!(err_path(&text), "phase_error.phases_rad");
    }

    #[test]
    fn snr_accepts_none_forms() {
        for v in ["null", "\"none\"", "\"None\""] {
            let text = MINIMAL.replace(
                "\"theta_true_deg\": 20",
                &format!("\"theta_true_deg\": 20, \"snr_db\": {v}"),
            );
            assert_eq!(ScenarioConfig::from_json(&text).unwrap().snr_db, None);
        }
        let text = MINIMAL.replace(
            "\"theta_true_deg\": 20",
            "\"theta_true_deg\": 20, \"snr_db\": 30",
        );
        assert_eq!(ScenarioConfig::from_json(&text).unwrap().snr_db, Some(30.0));
        let text = MINIMAL.replace(
            "\"theta_true_deg\": 20",
            "\"theta_true_deg\": 20, \"snr_db\": \"loud\"",
        );
        assert_eq!(err_path(&text), "snr_db");
    }

    #[test]
    fn gaps_build_cumulative_positions() {
        let text = MINIMAL.replace("\"positions_d\": [0, 5, 10]", "\"gaps_d\": [0.5, 10]");
        let g = ScenarioConfig::from_json(&text).unwrap().array().unwrap();
        let d = half_wavelength(2e9);
        let x: Vec<f64> = g.positions().iter().map(|p| p[0] / d).collect();
        assert!((x[1] - 0.5).abs() < 1e-12 && (x[2] - 10.5).abs() < 1e-12);
    }
}
