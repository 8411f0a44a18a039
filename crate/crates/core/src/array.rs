//! Element positions, plane-wave delays and narrowband steering.
//!
//! Linear arrays lie on the x axis with θ measured from broadside, so the
//! propagation direction is `d(θ) = (sin θ, cos θ, 0)` and `τ ∝ sin θ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayReference {
    #[default]
    FirstElement,
    Centroid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<Vec3>,
    reference: DelayReference,
}

/// Moments of the centroid-referenced delays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayStats {
    pub std_tau: f64,
    pub mu3: f64,
    pub mu4: f64,
}

pub fn direction_vector(theta: f64) -> Vec3 {
    [theta.sin(), theta.cos(), 0.0]
}

/// Half the carrier wavelength, the unit "d" of the array presets.
pub fn half_wavelength(carrier_freq: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * carrier_freq)
}

/// `a_m = e^{-jωτ_m}` for an explicit delay vector.
pub fn steering_from_delays(delays: &[f64], omega: f64) -> Vec<Complex64> {
    delays
        .iter()
        .map(|&tau| Complex64::from_polar(1.0, -omega * tau))
        .collect()
}

impl ArrayGeometry {
    pub fn new(positions: Vec<Vec3>, reference: DelayReference) -> Result<Self> {
        if positions.len() < 2 {
            return Err(invalid("positions", "an array needs at least two elements"));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("positions", "coordinates must be finite"));
        }
        for (i, p) in positions.iter().enumerate() {
            for q in &positions[i + 1..] {
                if p == q {
                    return Err(invalid("positions", "element positions must be distinct"));
                }
            }
        }
        Ok(Self {
            positions,
            reference,
        })
    }

    /// Elements on the x axis at `coords[m] · unit` metres.
    pub fn linear(coords: &[f64], unit: f64, reference: DelayReference) -> Result<Self> {
        Self::new(
            coords.iter().map(|&c| [c * unit, 0.0, 0.0]).collect(),
            reference,
        )
    }

    /// Elements on the x axis separated by consecutive `gaps · unit`,
    /// starting at the origin.
    pub fn from_gaps(gaps: &[f64], unit: f64, reference: DelayReference) -> Result<Self> {
        let mut coords = Vec::with_capacity(gaps.len() + 1);
        let mut acc = 0.0;
        coords.push(acc);
        for g in gaps {
            acc += g;
            coords.push(acc);
        }
        Self::linear(&coords, unit, reference)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn reference(&self) -> DelayReference {
        self.reference
    }

    pub fn with_reference(&self, reference: DelayReference) -> Self {
        Self {
            positions: self.positions.clone(),
            reference,
        }
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        Self {
            positions: self
                .positions
                .iter()
                .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
                .collect(),
            reference: self.reference,
        }
    }

    fn reference_point(&self) -> Vec3 {
        match self.reference {
            DelayReference::FirstElement => self.positions[0],
            DelayReference::Centroid => self.centroid(),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        let m = self.len() as f64;
        let mut c = [0.0; 3];
        for p in &self.positions {
            for k in 0..3 {
                c[k] += p[k] / m;
            }
        }
        c
    }

    /// `τ_m = (p_m − p_ref)·d(θ)/c`.
    pub fn delays(&self, theta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.delays_into(theta, &mut out);
        out
    }

    pub fn delays_into(&self, theta: f64, out: &mut [f64]) {
        let d = direction_vector(theta);
        let r = self.reference_point();
        for (o, p) in out.iter_mut().zip(&self.positions) {
            *o = ((p[0] - r[0]) * d[0] + (p[1] - r[1]) * d[1] + (p[2] - r[2]) * d[2])
                / SPEED_OF_LIGHT;
        }
        if self.reference == DelayReference::Centroid {
            // Remove the rounding residue so the delays sum to zero.
            let mean = out.iter().sum::<f64>() / out.len() as f64;
            out.iter_mut().for_each(|t| *t -= mean);
        }
    }

    /// Bound on `|τ_m(θ)|` over every direction.
    pub fn max_delay_bound(&self) -> f64 {
        let r = self.reference_point();
        self.positions
            .iter()
            .map(|p| ((p[0] - r[0]).powi(2) + (p[1] - r[1]).powi(2) + (p[2] - r[2]).powi(2)).sqrt())
            .fold(0.0, f64::max)
            / SPEED_OF_LIGHT
    }

    pub fn delay_stats(&self, theta: f64) -> DelayStats {
        let tau = self.delays(theta);
        delay_stats_of(&tau)
    }

    pub fn steering_vector(&self, theta: f64, omega: f64) -> Vec<Complex64> {
        steering_from_delays(&self.delays(theta), omega)
    }

    /// Uniform spacing of a linear array on the x axis, if it is one.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.positions.iter().any(|p| p[1] != 0.0 || p[2] != 0.0) {
            return None;
        }
        let mut xs: Vec<f64> = self.positions.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        let spacing = xs[1] - xs[0];
        let uniform = xs
            .windows(2)
            .all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing);
        uniform.then_some(spacing)
    }

    /// Every `θ ∈ (−π/2, π/2)` with `sin θ = sin θ_true + kλ/D`, ascending.
    pub fn grating_lobe_angles(&self, theta_true: f64, omega: f64) -> Result<Vec<f64>> {
        let spacing = self.uniform_spacing().ok_or(Error::NonUniformArray)?;
        let lambda = std::f64::consts::TAU * SPEED_OF_LIGHT / omega;
        let step = lambda / spacing;
        let s0 = theta_true.sin();
        let k_lo = ((-1.0 - s0) / step).floor() as i64;
        let k_hi = ((1.0 - s0) / step).ceil() as i64;
        let mut out: Vec<f64> = (k_lo..=k_hi)
            .filter_map(|k| {
                let s = s0 + k as f64 * step;
                (k == 0 || s.abs() < 1.0).then(|| if k == 0 { theta_true } else { s.asin() })
            })
            .collect();
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

pub fn delay_stats_of(tau: &[f64]) -> DelayStats {
    let m = tau.len() as f64;
    let mean = tau.iter().sum::<f64>() / m;
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for &t in tau {
        let c = t - mean;
        s2 += c * c;
        s3 += c * c * c;
        s4 += c * c * c * c;
    }
    DelayStats {
        std_tau: (s2 / m).sqrt(),
        mu3: s3 / m,
        mu4: s4 / m,
    }
}
