//! Analytic non-stationary waveforms: monopulse (MP), linear FM (LFM) and
//! sinusoidal FM (SFM), all unit amplitude with `Φ(0) = 0`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Scenario parameters used throughout the experiment presets.
pub mod defaults {
    pub const CARRIER_FREQ: f64 = 2.0e9;
    pub const PULSE_WIDTH: f64 = 200.0e-9;
    pub const LFM_BANDWIDTH: f64 = 800.0e6;
    pub const SFM_MOD_FREQ: f64 = 10.0e6;
    pub const SFM_MOD_INDEX: f64 = 15.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Waveform {
    Mp,
    Lfm { bandwidth: f64 },
    Sfm { mod_freq: f64, mod_index: f64 },
}

/// Where the waveform exists in time. `Pulse` restricts evaluation to
/// `[0, T_p]`; `Unbounded` continues the phase law indefinitely, which very
/// large apertures need because their delay spread exceeds the pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    #[default]
    Pulse,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalModel {
    waveform: Waveform,
    carrier_freq: f64,
    pulse_width: f64,
    support: Support,
}

impl SignalModel {
    pub fn new(waveform: Waveform, carrier_freq: f64, pulse_width: f64) -> Result<Self> {
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(invalid("carrier_freq", "must be finite and positive"));
        }
        if !(pulse_width.is_finite() && pulse_width > 0.0) {
            return Err(invalid("pulse_width", "must be finite and positive"));
        }
        match waveform {
            Waveform::Mp => {}
            Waveform::Lfm { bandwidth } => {
                if !bandwidth.is_finite() {
                    return Err(invalid("bandwidth", "must be finite"));
                }
            }
            Waveform::Sfm {
                mod_freq,
                mod_index,
            } => {
                if !(mod_freq.is_finite() && mod_freq >= 0.0) {
                    return Err(invalid("mod_freq", "must be finite and non-negative"));
                }
                if !mod_index.is_finite() {
                    return Err(invalid("mod_index", "must be finite"));
                }
            }
        }
        Ok(Self {
            waveform,
            carrier_freq,
            pulse_width,
            support: Support::Pulse,
        })
    }

    pub fn mp() -> Self {
        Self::new(Waveform::Mp, defaults::CARRIER_FREQ, defaults::PULSE_WIDTH).unwrap()
    }

    pub fn lfm() -> Self {
        let w = Waveform::Lfm {
            bandwidth: defaults::LFM_BANDWIDTH,
        };
        Self::new(w, defaults::CARRIER_FREQ, defaults::PULSE_WIDTH).unwrap()
    }

    pub fn sfm() -> Self {
        let w = Waveform::Sfm {
            mod_freq: defaults::SFM_MOD_FREQ,
            mod_index: defaults::SFM_MOD_INDEX,
        };
        Self::new(w, defaults::CARRIER_FREQ, defaults::PULSE_WIDTH).unwrap()
    }

    pub fn with_support(mut self, support: Support) -> Self {
        self.support = support;
        self
    }

    pub fn waveform(&self) -> Waveform {
        self.waveform
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn carrier_omega(&self) -> f64 {
        TAU * self.carrier_freq
    }

    pub fn pulse_width(&self) -> f64 {
        self.pulse_width
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// `k = 2πB/T_p` for LFM, zero otherwise.
    pub fn chirp_rate(&self) -> f64 {
        match self.waveform {
            Waveform::Lfm { bandwidth } => TAU * bandwidth / self.pulse_width,
            _ => 0.0,
        }
    }

    /// True when ω̇ vanishes identically, so the generator is a scalar.
    pub fn is_static(&self) -> bool {
        match self.waveform {
            Waveform::Mp => true,
            Waveform::Lfm { bandwidth } => bandwidth == 0.0,
            Waveform::Sfm {
                mod_freq,
                mod_index,
            } => mod_freq == 0.0 || mod_index == 0.0,
        }
    }

    pub fn in_support(&self, t: f64) -> bool {
        match self.support {
            Support::Unbounded => t.is_finite(),
            Support::Pulse => {
                let slack = 1e-12 * self.pulse_width;
                t >= -slack && t <= self.pulse_width + slack
            }
        }
    }

    pub fn phase(&self, t: f64) -> f64 {
        let wc = self.carrier_omega();
        match self.waveform {
            Waveform::Mp => wc * t,
            Waveform::Lfm { .. } => wc * t + 0.5 * self.chirp_rate() * t * t,
            Waveform::Sfm {
                mod_freq,
                mod_index,
            } => wc * t + mod_index * (TAU * mod_freq * t).sin(),
        }
    }

    pub fn frequency(&self, t: f64) -> f64 {
        self.nth_frequency_derivative(t, 0)
    }

    /// ω̇ (`order = 1`) or ω̈ (`order = 2`).
    pub fn frequency_derivative(&self, t: f64, order: usize) -> Result<f64> {
        match order {
            1 | 2 => Ok(self.nth_frequency_derivative(t, order)),
            _ => Err(Error::UnsupportedOrder(order)),
        }
    }

    /// `ω^{(n)}(t)` for any `n ≥ 0`; used by the higher-order frames.
    pub fn nth_frequency_derivative(&self, t: f64, n: usize) -> f64 {
        match self.waveform {
            Waveform::Mp => {
                if n == 0 {
                    self.carrier_omega()
                } else {
                    0.0
                }
            }
            Waveform::Lfm { .. } => match n {
                0 => self.carrier_omega() + self.chirp_rate() * t,
                1 => self.chirp_rate(),
                _ => 0.0,
            },
            Waveform::Sfm {
                mod_freq,
                mod_index,
            } => {
                let wm = TAU * mod_freq;
                let (sin, cos) = (wm * t).sin_cos();
                let cycle = match n % 4 {
                    0 => cos,
                    1 => -sin,
                    2 => -cos,
                    _ => sin,
                };
                let osc = mod_index * wm.powi(n as i32 + 1) * cycle;
                if n == 0 {
                    self.carrier_omega() + osc
                } else {
                    osc
                }
            }
        }
    }

    /// Fills `out[i] = ω^{(i)}(t)`.
    pub fn frequency_derivatives(&self, t: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.nth_frequency_derivative(t, i);
        }
    }

    pub fn sample(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.phase(t))
    }

    /// Largest `|ω(t)|` for `t ∈ [a, b]`, in rad/s.
    pub fn peak_frequency(&self, a: f64, b: f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let mut best = self.frequency(a).abs().max(self.frequency(b).abs());
        if let Waveform::Sfm { mod_freq, .. } = self.waveform {
            if mod_freq > 0.0 {
                // Extrema of cos(2π f_m t) sit at t = n / (2 f_m).
                let half = 0.5 / mod_freq;
                let first = (a / half).ceil() as i64;
                let last = (b / half).floor() as i64;
                if first <= last {
                    for n in first..=last.min(first + 1) {
                        best = best.max(self.frequency(n as f64 * half).abs());
                    }
                }
            }
        }
        best
    }

    /// Peak instantaneous frequency over the pulse, in Hz.
    pub fn max_frequency_hz(&self) -> f64 {
        self.peak_frequency(0.0, self.pulse_width) / TAU
    }
}

/// Phase wrapped to `[-π, π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = (phi + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_at_origin_is_zero() {
        for m in [SignalModel::mp(), SignalModel::lfm(), SignalModel::sfm()] {
            assert_eq!(m.phase(0.0), 0.0);
            assert_eq!(m.sample(0.0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn lfm_phase_at_pulse_end() {
        let m = SignalModel::lfm();
        let tp = 200e-9;
        let k = TAU * 4e15;
        let expect = TAU * 2e9 * tp + 0.5 * k * tp * tp;
        assert!((m.phase(tp) - expect).abs() < 1e-9 * expect);
        assert!((m.chirp_rate() - k).abs() < 1e-6 * k);
    }

    #[test]
    fn sfm_quarter_period_phase() {
        let m = SignalModel::sfm();
        let t = 1.0 / (4.0 * 10e6);
        let expect = TAU * 2e9 * t + 15.0;
        assert!((m.phase(t) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn frequencies_at_origin() {
        let wc = TAU * 2e9;
        assert_eq!(SignalModel::mp().frequency(123e-9), wc);
        assert_eq!(SignalModel::lfm().frequency(0.0), wc);
        let sfm = SignalModel::sfm().frequency(0.0);
        assert!((sfm - (wc + 15.0 * TAU * 10e6)).abs() < 1e-3);
    }

    #[test]
    fn frequency_derivative_values() {
        assert_eq!(
            SignalModel::mp().frequency_derivative(1e-8, 1).unwrap(),
            0.0
        );
        assert_eq!(
            SignalModel::mp().frequency_derivative(1e-8, 2).unwrap(),
            0.0
        );
        let k = SignalModel::lfm().frequency_derivative(5e-8, 1).unwrap();
        assert!((k - TAU * 4e15).abs() < 1e-6 * k);
        assert_eq!(
            SignalModel::lfm().frequency_derivative(5e-8, 2).unwrap(),
            0.0
        );
        assert!(
            SignalModel::sfm()
                .frequency_derivative(0.0, 1)
                .unwrap()
                .abs()
                < 1e-6
        );
        let wm = TAU * 10e6;
        let w2 = SignalModel::sfm().frequency_derivative(0.0, 2).unwrap();
        assert!((w2 + 15.0 * wm.powi(3)).abs() < 1e-12 * w2.abs());
    }

    #[test]
    fn unsupported_order_is_an_error() {
        let m = SignalModel::lfm();
        assert!(matches!(
            m.frequency_derivative(0.0, 0),
            Err(Error::UnsupportedOrder(0))
        ));
        assert!(matches!(
            m.frequency_derivative(0.0, 3),
            Err(Error::UnsupportedOrder(3))
        ));
    }

    #[test]
    fn mp_quarter_period_is_j() {
        let s = SignalModel::mp().sample(1.0 / (4.0 * 2e9));
        assert!((s - Complex64::i()).norm() < 1e-12);
    }

    #[test]
    fn lfm_midpulse_sample_matches_trapezoid_integral_of_frequency() {
        let m = SignalModel::lfm();
        let t_end = 100e-9;
        let n = 200_000;
        let h = t_end / n as f64;
        let mut integral = 0.5 * (m.frequency(0.0) + m.frequency(t_end));
        for i in 1..n {
            integral += m.frequency(i as f64 * h);
        }
        integral *= h;
        // The integrand is affine, so the trapezoid rule is exact up to rounding.
        assert!((integral - m.phase(t_end)).abs() < 1e-9 * integral);
        let oracle = Complex64::from_polar(1.0, integral);
        assert!((oracle - m.sample(t_end)).norm() < 1e-6);
    }

    #[test]
    fn sfm_sample_matches_simpson_integral_of_frequency() {
        let m = SignalModel::sfm();
        let t_end = 137e-9;
        let n = 20_000;
        let h = t_end / n as f64;
        let mut s = m.frequency(0.0) + m.frequency(t_end);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * m.frequency(i as f64 * h);
        }
        let integral = s * h / 3.0;
        assert!((wrap_phase(integral - m.phase(t_end))).abs() < 1e-8);
    }

    #[test]
    fn lfm_with_zero_bandwidth_equals_mp() {
        let lfm0 = SignalModel::new(Waveform::Lfm { bandwidth: 0.0 }, 2e9, 200e-9).unwrap();
        let mp = SignalModel::mp();
        assert!(lfm0.is_static());
        for i in 0..50 {
            let t = i as f64 * 3.7e-9;
            assert_eq!(lfm0.phase(t), mp.phase(t));
            assert_eq!(lfm0.frequency(t), mp.frequency(t));
            assert_eq!(lfm0.sample(t), mp.sample(t));
            assert_eq!(lfm0.frequency_derivative(t, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(SignalModel::new(Waveform::Mp, 0.0, 1e-7).is_err());
        assert!(SignalModel::new(Waveform::Mp, 1e9, -1.0).is_err());
        assert!(SignalModel::new(
            Waveform::Lfm {
                bandwidth: f64::NAN
            },
            1e9,
            1e-7
        )
        .is_err());
    }

    #[test]
    fn peak_frequency_of_reference_waveforms() {
        assert!((SignalModel::mp().max_frequency_hz() - 2e9).abs() < 1.0);
        assert!((SignalModel::lfm().max_frequency_hz() - 2.8e9).abs() < 10.0);
        assert!((SignalModel::sfm().max_frequency_hz() - 2.15e9).abs() < 10.0);
    }

    #[test]
    fn support_bounds() {
        let m = SignalModel::lfm();
        assert!(m.in_support(0.0) && m.in_support(200e-9));
        assert!(!m.in_support(-1e-9) && !m.in_support(201e-9));
        assert!(m.with_support(Support::Unbounded).in_support(-1e-6));
    }
}
