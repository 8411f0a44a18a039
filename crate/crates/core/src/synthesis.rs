//! Sampled observation trajectories: exact delayed-phase synthesis, circular
//! Gaussian noise and per-channel phase errors.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::array::ArrayGeometry;
use crate::error::{invalid, Error, Result};
use crate::signal::{SignalModel, Support};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingGrid {
    pub t_start: f64,
    pub dt: f64,
    pub n_samples: usize,
}

impl SamplingGrid {
    pub fn new(t_start: f64, dt: f64, n_samples: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", "must be finite and positive"));
        }
        if n_samples < 2 {
            return Err(invalid("n_samples", "need at least two samples"));
        }
        Ok(Self {
            t_start,
            dt,
            n_samples,
        })
    }

    /// Samples `lo, lo + dt, …` not exceeding `hi`.
    pub fn spanning(lo: f64, hi: f64, dt: f64) -> Result<Self> {
        if hi < lo {
            return Err(Error::EmptyWindow { lo, hi });
        }
        let n = ((hi - lo) / dt * (1.0 + 1e-12)).floor() as usize + 1;
        Self::new(lo, dt, n).map_err(|_| Error::EmptyWindow { lo, hi })
    }

    /// Window over which every delayed argument stays in the signal support,
    /// given the extreme delays the scenario can produce. `guard` widens the
    /// margin at both ends.
    pub fn for_delays(
        model: &SignalModel,
        (min_tau, max_tau): (f64, f64),
        guard: f64,
        dt: f64,
    ) -> Result<Self> {
        match model.support() {
            Support::Unbounded => Self::spanning(0.0, model.pulse_width(), dt),
            Support::Pulse => {
                let lo = max_tau.max(0.0) + guard;
                let hi = model.pulse_width() + min_tau.min(0.0) - guard;
                Self::spanning(lo, hi, dt)
            }
        }
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_start + n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|n| self.time(n)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_samples - 1)
    }
}

/// `dt = 1 / (oversampling · f_max)` with `f_max` the peak frequency over the pulse.
pub fn default_dt(model: &SignalModel, oversampling: f64) -> f64 {
    1.0 / (oversampling * model.max_frequency_hz())
}

/// Smallest and largest delay of any element over the given angles.
pub fn delay_extremes(geom: &ArrayGeometry, thetas: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut buf = vec![0.0; geom.len()];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for th in thetas {
        geom.delays_into(th, &mut buf);
        for &t in &buf {
            lo = lo.min(t);
            hi = hi.max(t);
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Provenance {
    pub theta: Option<f64>,
    pub snr_db: Option<f64>,
    pub noise_seed: Option<u64>,
    pub phase_errors: Option<Vec<f64>>,
}

/// Complex `M × N` observation, stored row-major by element.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    m: usize,
    grid: SamplingGrid,
    data: Vec<Complex64>,
    pub meta: Provenance,
}

impl Trajectory {
    pub fn from_rows(rows: Vec<Vec<Complex64>>, grid: SamplingGrid) -> Result<Self> {
        let m = rows.len();
        if m == 0 || rows.iter().any(|r| r.len() != grid.n_samples) {
            return Err(invalid(
                "rows",
                "every row must hold one value per grid sample",
            ));
        }
        Ok(Self {
            m,
            grid,
            data: rows.into_iter().flatten().collect(),
            meta: Provenance::default(),
        })
    }

    pub fn elements(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.grid.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.grid.n_samples == 0
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        let n = self.grid.n_samples;
        &self.data[m * n..(m + 1) * n]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [Complex64] {
        let n = self.grid.n_samples;
        &mut self.data[m * n..(m + 1) * n]
    }

    pub fn at(&self, m: usize, n: usize) -> Complex64 {
        self.data[m * self.grid.n_samples + n]
    }

    pub fn column(&self, n: usize) -> Vec<Complex64> {
        (0..self.m).map(|m| self.at(m, n)).collect()
    }

    pub fn sample_norm(&self, n: usize) -> f64 {
        (0..self.m)
            .map(|m| self.at(m, n).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Noiseless `x_m(t_n) = e^{jΦ(t_n − τ_m(θ))}`.
pub fn synthesize(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta: f64,
    grid: &SamplingGrid,
) -> Result<Trajectory> {
    let tau = geom.delays(theta);
    check_support(model, &tau, grid)?;
    let n = grid.n_samples;
    let mut data = Vec::with_capacity(tau.len() * n);
    for &t in &tau {
        data.extend((0..n).map(|i| model.sample(grid.time(i) - t)));
    }
    Ok(Trajectory {
        m: tau.len(),
        grid: *grid,
        data,
        meta: Provenance {
            theta: Some(theta),
            ..Provenance::default()
        },
    })
}

pub(crate) fn check_support(model: &SignalModel, tau: &[f64], grid: &SamplingGrid) -> Result<()> {
    if model.support() == Support::Unbounded {
        return Ok(());
    }
    for (element, &t) in tau.iter().enumerate() {
        for sample in [0, grid.n_samples - 1] {
            let arg = grid.time(sample) - t;
            if !model.in_support(arg) {
                return Err(Error::SupportViolation {
                    element,
                    sample,
                    arg,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseErrorModel {
    pub phases: Vec<f64>,
    pub seed: Option<u64>,
}

impl PhaseErrorModel {
    pub fn explicit(phases: Vec<f64>) -> Self {
        Self { phases, seed: None }
    }

    /// Phases drawn uniformly on `[−π, π)`.
    pub fn random(m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
        Self {
            phases,
            seed: Some(seed),
        }
    }

    /// Diagonal of `Γ`.
    pub fn gains(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p))
            .collect()
    }
}

pub fn apply_phase_error(traj: &Trajectory, err: &PhaseErrorModel) -> Result<Trajectory> {
    if err.phases.len() != traj.m {
        return Err(invalid("phases", "one phase per element is required"));
    }
    let mut out = traj.clone();
    for (m, g) in err.gains().into_iter().enumerate() {
        out.row_mut(m).iter_mut().for_each(|x| *x *= g);
    }
    out.meta.phase_errors = Some(err.phases.clone());
    Ok(out)
}

/// Per-element SNR with unit signal power; `None` means noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl NoiseModel {
    pub fn variance(&self) -> f64 {
        match self.snr_db {
            Some(s) if s.is_finite() => 10f64.powf(-s / 10.0),
            _ => 0.0,
        }
    }
}

/// Fills `out` with circular complex Gaussian samples of variance `var`.
pub fn complex_gaussian(seed: u64, var: f64, out: &mut [Complex64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (0.5 * var).sqrt();
    for z in out.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(s * re, s * im);
    }
}

pub fn add_noise(traj: &Trajectory, noise: &NoiseModel) -> Trajectory {
    let mut out = traj.clone();
    let var = noise.variance();
    if var > 0.0 {
        let mut n = vec![Complex64::new(0.0, 0.0); out.data.len()];
        complex_gaussian(noise.seed, var, &mut n);
        out.data.iter_mut().zip(&n).for_each(|(x, e)| *x += e);
        out.meta.noise_seed = Some(noise.seed);
    }
    out.meta.snr_db = noise.snr_db;
    out
}

/// Splits a master seed into independent per-stream, per-index seeds
/// (SplitMix64 finalizer over a keyed combination).
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
