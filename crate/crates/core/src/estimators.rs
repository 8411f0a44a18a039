//! Grid-search DOA estimators: coherent velocity matching (Framework I),
//! curvature matching (Framework II) and narrowband MUSIC.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{steering_from_delays, ArrayGeometry};
use crate::error::{invalid, Error, Result};
use crate::generator::analytic_derivatives;
use crate::geometry::{curvature_series, CurvatureSeries};
use crate::linalg::hermitian_eigen;
use crate::sg::{SavitzkyGolay, SgConfig};
use crate::signal::SignalModel;
use crate::synthesis::{check_support, synthesize, SamplingGrid, Trajectory};

/// Keeps `1/(J + ε)` finite at an exact match.
pub const COST_EPSILON: f64 = 1e-30;
/// Relative gap below which the two best peaks count as tied.
pub const TIE_TOLERANCE: f64 = 1e-6;
/// Relative spread of the model curvature bank below which Framework II
/// cannot discriminate angles.
pub const FLAT_BANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ThetaGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("step", "must be finite and positive"));
        }
        if !(min.is_finite() && max.is_finite() && max >= min) {
            return Err(invalid("theta range", "need finite bounds with max >= min"));
        }
        Ok(Self { min, max, step })
    }

    pub fn from_degrees(min: f64, max: f64, step: f64) -> Result<Self> {
        Self::new(min.to_radians(), max.to_radians(), step.to_radians())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    #[serde(alias = "f1")]
    Framework1,
    #[serde(alias = "f2")]
    Framework2,
    Music,
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Framework1 => "framework1",
            Self::Framework2 => "framework2",
            Self::Music => "music",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: ThetaGrid,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    pub valid: bool,
    pub normalized: bool,
}

impl Spectrum {
    pub fn thetas(&self) -> Vec<f64> {
        self.grid.points()
    }

    /// Copy scaled so the maximum is one.
    pub fn peak_normalized(&self) -> Spectrum {
        let peak = self.values.iter().cloned().fold(0.0, f64::max);
        let mut out = self.clone();
        if peak > 0.0 && peak.is_finite() {
            out.values.iter_mut().for_each(|v| *v /= peak);
        }
        out.normalized = true;
        out
    }

    pub fn nearest_index(&self, theta: f64) -> usize {
        let i = ((theta - self.grid.min) / self.grid.step).round();
        (i.max(0.0) as usize).min(self.values.len() - 1)
    }

    pub fn value_near(&self, theta: f64) -> f64 {
        self.values[self.nearest_index(theta)]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub theta_hat: f64,
    /// Local maxima `(θ, value)`, best first.
    pub peaks: Vec<(f64, f64)>,
    pub ties: bool,
}

impl Estimate {
    /// Peaks at or above `fraction` of the best one.
    pub fn peaks_above(&self, fraction: f64) -> Vec<(f64, f64)> {
        let top = self.peaks.first().map_or(0.0, |p| p.1);
        self.peaks
            .iter()
            .copied()
            .filter(|p| p.1 >= fraction * top)
            .collect()
    }
}

/// Grid angles closer than this (radians) count as the same magnitude.
const ANGLE_EQ: f64 = 1e-12;

fn tie_order(a: &(f64, f64), b: &(f64, f64)) -> std::cmp::Ordering {
    let (ma, mb) = (a.0.abs(), b.0.abs());
    if (ma - mb).abs() > ANGLE_EQ {
        ma.total_cmp(&mb)
    } else {
        a.0.total_cmp(&b.0)
    }
}

/// Local maxima (endpoints included, leftmost point of a plateau), best
/// first. Near-equal leaders are ordered by smallest `|θ|`, then smallest `θ`.
pub fn pick_estimate(spec: &Spectrum) -> Result<Estimate> {
    if !spec.valid || spec.values.is_empty() {
        return Err(Error::InvalidSpectrum);
    }
    let v = &spec.values;
    let last = v.len() - 1;
    let mut peaks: Vec<(f64, f64)> = (0..=last)
        .filter(|&i| (i == 0 || v[i] > v[i - 1]) && (i == last || v[i] >= v[i + 1]))
        .map(|i| (spec.grid.point(i), v[i]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| tie_order(a, b)));
    let top = peaks[0].1;
    let tied = peaks
        .iter()
        .take_while(|p| top - p.1 <= TIE_TOLERANCE * top.abs())
        .count();
    peaks[..tied].sort_by(tie_order);
    Ok(Estimate {
        theta_hat: peaks[0].0,
        ties: tied > 1,
        peaks,
    })
}

/// How Framework II obtains the model curvatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelDerivatives {
    /// Same filter as the observation applied to the noiseless model.
    #[default]
    Numeric,
    /// Exact derivatives of the model.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub sg: SgConfig,
    /// Weights of the κ₁ and κ₂ terms in the Framework II cost.
    pub weights: [f64; 2],
    pub model_derivatives: ModelDerivatives,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            sg: SgConfig::default(),
            weights: [1.0, 0.0],
            model_derivatives: ModelDerivatives::Numeric,
        }
    }
}

impl EstimatorConfig {
    fn needs_torsion(&self) -> bool {
        self.weights[1] != 0.0
    }
}

/// Observation velocity rows `[element][sample]` on the filter's interior grid.
#[derive(Debug, Clone)]
pub struct ObservedVelocity {
    pub times: Vec<f64>,
    rows: Vec<Vec<Complex64>>,
}

impl ObservedVelocity {
    pub fn from_trajectory(obs: &Trajectory, sg: &SgConfig) -> Result<Self> {
        let filter = SavitzkyGolay::new(sg.with_max_deriv(1))?;
        let h = sg.half();
        let rows = (0..obs.elements())
            .map(|m| filter.apply_complex(obs.row(m), 1, obs.grid().dt))
            .collect::<Result<Vec<_>>>()?;
        let times = (0..rows[0].len()).map(|i| obs.grid().time(i + h)).collect();
        Ok(Self { times, rows })
    }
}

/// Framework I scores of several observations sharing one sampling grid.
/// Model velocities are computed once per angle and reused across the batch.
pub fn framework1_batch(
    observations: &[ObservedVelocity],
    model: &SignalModel,
    geom: &ArrayGeometry,
    grid: &ThetaGrid,
) -> Result<Vec<Spectrum>> {
    let Some(first) = observations.first() else {
        return Ok(Vec::new());
    };
    let times = &first.times;
    if observations.iter().any(|o| o.times.len() != times.len()) {
        return Err(invalid(
            "observations",
            "all observations must share the sampling grid",
        ));
    }
    let obs_energy: Vec<f64> = observations
        .iter()
        .map(|o| o.rows.iter().flatten().map(|z| z.norm_sqr()).sum())
        .collect();
    let interior = SamplingGrid::new(times[0], times[1] - times[0], times.len())?;

    let per_theta: Vec<Vec<f64>> = grid
        .points()
        .into_par_iter()
        .map(|theta| -> Result<Vec<f64>> {
            let tau = geom.delays(theta);
            check_support(model, &tau, &interior)?;
            let mut cross = vec![Complex64::new(0.0, 0.0); observations.len()];
            let mut energy = 0.0;
            let mut vm = vec![Complex64::new(0.0, 0.0); times.len()];
            for (m, &tk) in tau.iter().enumerate() {
                for (slot, &t) in vm.iter_mut().zip(times) {
                    let u = t - tk;
                    *slot = Complex64::new(0.0, model.frequency(u)) * model.sample(u);
                }
                energy += vm.iter().map(|z| z.norm_sqr()).sum::<f64>();
                for (c, o) in cross.iter_mut().zip(observations) {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (a, b) in o.rows[m].iter().zip(&vm) {
                        // conj(a) * b
                        re += a.re * b.re + a.im * b.im;
                        im += a.re * b.im - a.im * b.re;
                    }
                    *c += Complex64::new(re, im);
                }
            }
            Ok(cross
                .iter()
                .zip(&obs_energy)
                .map(|(c, eo)| c.norm() / (eo.sqrt() * energy.sqrt()))
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok((0..observations.len())
        .map(|k| Spectrum {
            grid: *grid,
            values: per_theta.iter().map(|row| row[k]).collect(),
            kind: SpectrumKind::Framework1,
            valid: true,
            normalized: false,
        })
        .collect())
}

/// `|Σ v_obsᴴ v_model(θ)| / (‖v_obs‖ ‖v_model(θ)‖)` over the interior grid.
pub fn framework1_spectrum(
    obs: &Trajectory,
    model: &SignalModel,
    geom: &ArrayGeometry,
    grid: &ThetaGrid,
    cfg: &EstimatorConfig,
) -> Result<Spectrum> {
    let v = ObservedVelocity::from_trajectory(obs, &cfg.sg)?;
    Ok(framework1_batch(std::slice::from_ref(&v), model, geom, grid)?.remove(0))
}

/// Model curvature series for every candidate angle.
#[derive(Debug, Clone)]
pub struct CurvatureBank {
    pub grid: ThetaGrid,
    pub times: Vec<f64>,
    kappa1: Vec<Vec<f64>>,
    /// κ₂ with NaN marking undefined samples; empty unless requested.
    kappa2: Vec<Vec<f64>>,
    pub valid: bool,
}

impl CurvatureBank {
    /// Builds the bank on the observation's sampling grid. A waveform with
    /// no frequency dynamics yields an invalid bank without evaluating it,
    /// since its curvature cannot depend on the angle.
    pub fn build(
        model: &SignalModel,
        geom: &ArrayGeometry,
        sampling: &SamplingGrid,
        grid: &ThetaGrid,
        cfg: &EstimatorConfig,
    ) -> Result<Self> {
        if model.is_static() {
            return Ok(Self {
                grid: *grid,
                times: Vec::new(),
                kappa1: Vec::new(),
                kappa2: Vec::new(),
                valid: false,
            });
        }
        Self::build_full(model, geom, sampling, grid, cfg)
    }

    /// As [`CurvatureBank::build`] but always evaluates every angle and
    /// decides validity from the spread of the bank.
    pub fn build_full(
        model: &SignalModel,
        geom: &ArrayGeometry,
        sampling: &SamplingGrid,
        grid: &ThetaGrid,
        cfg: &EstimatorConfig,
    ) -> Result<Self> {
        let order = if cfg.needs_torsion() { 3 } else { 2 };
        let sg = cfg.sg.with_max_deriv(order);
        let filter = SavitzkyGolay::new(sg)?;
        let h = sg.half();
        if sampling.n_samples < sg.window {
            return Err(Error::TooShort {
                have: sampling.n_samples,
                need: sg.window,
            });
        }
        let interior =
            SamplingGrid::new(sampling.time(h), sampling.dt, sampling.n_samples - 2 * h)?;
        let rows: Vec<(Vec<f64>, Vec<f64>)> = grid
            .points()
            .into_par_iter()
            .map(|theta| -> Result<(Vec<f64>, Vec<f64>)> {
                let stack = match cfg.model_derivatives {
                    ModelDerivatives::Numeric => {
                        filter.differentiate(&synthesize(model, geom, theta, sampling)?)?
                    }
                    ModelDerivatives::Analytic => {
                        analytic_derivatives(model, geom, theta, &interior, order)?
                    }
                };
                let series = curvature_series(&stack)?;
                let k2 = if order == 3 {
                    series
                        .kappa2
                        .iter()
                        .map(|k| k.unwrap_or(f64::NAN))
                        .collect()
                } else {
                    Vec::new()
                };
                Ok((series.kappa1, k2))
            })
            .collect::<Result<_>>()?;
        let (kappa1, kappa2): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        let base = &kappa1[0];
        let base_norm = base.iter().map(|k| k * k).sum::<f64>().sqrt();
        let spread = kappa1
            .iter()
            .map(|row| {
                row.iter()
                    .zip(base)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        Ok(Self {
            grid: *grid,
            times: interior.times(),
            kappa1,
            kappa2: if order == 3 { kappa2 } else { Vec::new() },
            valid: spread > FLAT_BANK_TOLERANCE * base_norm,
        })
    }

    pub fn kappa1(&self, i: usize) -> &[f64] {
        &self.kappa1[i]
    }

    /// `1 / (J(θ) + ε)` with `J = Σ w₁Δκ₁² + w₂Δκ₂²`.
    pub fn spectrum(&self, obs: &CurvatureSeries, weights: [f64; 2]) -> Result<Spectrum> {
        if !self.valid {
            return Ok(Spectrum {
                grid: self.grid,
                values: vec![0.0; self.grid.len()],
                kind: SpectrumKind::Framework2,
                valid: false,
                normalized: false,
            });
        }
        if obs.kappa1.len() != self.times.len() {
            return Err(invalid(
                "observation",
                "curvature series does not match the bank's grid",
            ));
        }
        let use_k2 = weights[1] != 0.0;
        if use_k2 && self.kappa2.is_empty() {
            return Err(invalid("weights", "bank was built without torsion"));
        }
        let obs_k2: Vec<f64> = obs.kappa2.iter().map(|k| k.unwrap_or(f64::NAN)).collect();
        let values = (0..self.kappa1.len())
            .into_par_iter()
            .map(|i| {
                let mut j1 = 0.0;
                for (a, b) in obs.kappa1.iter().zip(&self.kappa1[i]) {
                    j1 += (a - b) * (a - b);
                }
                let mut j2 = 0.0;
                if use_k2 {
                    for (a, b) in obs_k2.iter().zip(&self.kappa2[i]) {
                        let d = a - b;
                        if d.is_finite() {
                            j2 += d * d;
                        }
                    }
                }
                1.0 / (weights[0] * j1 + weights[1] * j2 + COST_EPSILON)
            })
            .collect();
        Ok(Spectrum {
            grid: self.grid,
            values,
            kind: SpectrumKind::Framework2,
            valid: true,
            normalized: false,
        })
    }
}

/// Observed curvature series for Framework II.
pub fn observed_curvature(obs: &Trajectory, cfg: &EstimatorConfig) -> Result<CurvatureSeries> {
    let order = if cfg.needs_torsion() { 3 } else { 2 };
    let stack = SavitzkyGolay::new(cfg.sg.with_max_deriv(order))?.differentiate(obs)?;
    curvature_series(&stack)
}

pub fn framework2_spectrum(
    obs: &Trajectory,
    model: &SignalModel,
    geom: &ArrayGeometry,
    grid: &ThetaGrid,
    cfg: &EstimatorConfig,
) -> Result<Spectrum> {
    let bank = CurvatureBank::build(model, geom, obs.grid(), grid, cfg)?;
    if !bank.valid {
        return bank.spectrum(&CurvatureSeries::empty(), cfg.weights);
    }
    bank.spectrum(&observed_curvature(obs, cfg)?, cfg.weights)
}

/// Narrowband MUSIC at `omega_c` for a single source.
pub fn music_spectrum(
    obs: &Trajectory,
    geom: &ArrayGeometry,
    omega_c: f64,
    grid: &ThetaGrid,
) -> Result<Spectrum> {
    let m = obs.elements();
    let n = obs.len();
    if m < 2 || m != geom.len() {
        return Err(invalid(
            "geometry",
            "MUSIC needs the observation's M >= 2 elements",
        ));
    }
    if n < m {
        return Err(Error::TooShort { have: n, need: m });
    }
    let mut r = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in i..m {
            let s: Complex64 = obs
                .row(i)
                .iter()
                .zip(obs.row(j))
                .map(|(a, b)| a * b.conj())
                .sum();
            r[i * m + j] = s / n as f64;
            r[j * m + i] = (s / n as f64).conj();
        }
    }
    let eig = hermitian_eigen(&r, m);
    let noise = &eig.vectors[..m - 1];
    let values = grid
        .points()
        .into_iter()
        .map(|theta| {
            let a = steering_from_delays(&geom.delays(theta), omega_c);
            let d: f64 = noise
                .iter()
                .map(|e| {
                    e.iter()
                        .zip(&a)
                        .map(|(x, y)| x.conj() * y)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            1.0 / (d + COST_EPSILON)
        })
        .collect();
    Ok(Spectrum {
        grid: *grid,
        values,
        kind: SpectrumKind::Music,
        valid: true,
        normalized: false,
    })
}

impl CurvatureSeries {
    pub(crate) fn empty() -> Self {
        Self {
            times: Vec::new(),
            kappa1: Vec::new(),
            kappa2: Vec::new(),
            speed: Vec::new(),
            flags: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(values: Vec<f64>, min_deg: f64, step_deg: f64) -> Spectrum {
        let n = values.len();
        Spectrum {
            grid: ThetaGrid::from_degrees(min_deg, min_deg + step_deg * (n - 1) as f64, step_deg)
                .unwrap(),
            values,
            kind: SpectrumKind::Music,
            valid: true,
            normalized: false,
        }
    }

    #[test]
    fn grid_points() {
        let g = ThetaGrid::from_degrees(-90.0, 90.0, 0.05).unwrap();
        assert_eq!(g.len(), 3601);
        assert!((g.point(2200).to_degrees() - 20.0).abs() < 1e-9);
        assert!((g.point(3600) - g.max).abs() < 1e-12);
        assert!(ThetaGrid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ramp_peaks_at_endpoint() {
        let e = pick_estimate(&spec((0..10).map(|i| i as f64).collect(), 0.0, 1.0)).unwrap();
        assert_eq!(e.peaks.len(), 1);
        assert!((e.theta_hat.to_degrees() - 9.0).abs() < 1e-9);
        let e = pick_estimate(&spec((0..10).map(|i| -(i as f64)).collect(), 0.0, 1.0)).unwrap();
        assert!(e.theta_hat.abs() < 1e-12);
    }

    #[test]
    fn symmetric_pair_is_tie_broken() {
        let mut v = vec![0.0; 81];
        v[20] = 1.0; // -20 deg
        v[60] = 1.0; // +20 deg
        let e = pick_estimate(&spec(v.clone(), -40.0, 1.0)).unwrap();
        assert!(e.ties);
        assert!((e.theta_hat.to_degrees() + 20.0).abs() < 1e-9);
        v[60] = 1.0 + 1e-3;
        let e = pick_estimate(&spec(v, -40.0, 1.0)).unwrap();
        assert!(!e.ties);
        assert!((e.theta_hat.to_degrees() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn delta_peak() {
        let mut v = vec![0.1; 50];
        v[17] = 5.0;
        let e = pick_estimate(&spec(v, 0.0, 0.5)).unwrap();
        assert!((e.theta_hat.to_degrees() - 8.5).abs() < 1e-9);
        assert!(!e.ties);
    }

    #[test]
    fn invalid_spectrum_propagates() {
        let mut s = spec(vec![0.0; 5], 0.0, 1.0);
        s.valid = false;
        assert!(matches!(pick_estimate(&s), Err(Error::InvalidSpectrum)));
    }

    #[test]
    fn smallest_magnitude_wins_three_way_tie() {
        let mut v = vec![0.0; 21];
        v[2] = 1.0;
        v[12] = 1.0;
        v[18] = 1.0;
        let e = pick_estimate(&spec(v, -10.0, 1.0)).unwrap();
        assert!((e.theta_hat.to_degrees() - 2.0).abs() < 1e-9);
    }
}
