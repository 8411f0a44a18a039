//! Savitzky–Golay differentiation.
//!
//! Filter taps come from the discrete orthogonal (Gram) polynomials of the
//! window, built with the Stieltjes three-term recurrence on nodes scaled to
//! `[-1, 1]`. Solving the normal equations of a Vandermonde system instead
//! loses all accuracy beyond polynomial orders of roughly 10.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{DerivativeStack, StackSource};
use crate::synthesis::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgConfig {
    pub window: usize,
    pub polyorder: usize,
    pub max_deriv: usize,
}

impl Default for SgConfig {
    fn default() -> Self {
        Self {
            window: 21,
            polyorder: 7,
            max_deriv: 3,
        }
    }
}

impl SgConfig {
    pub fn new(window: usize, polyorder: usize, max_deriv: usize) -> Result<Self> {
        let cfg = Self {
            window,
            polyorder,
            max_deriv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidFilter(format!(
                "window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if self.polyorder >= self.window {
            return Err(Error::InvalidFilter(format!(
                "polyorder {} must be below the window {}",
                self.polyorder, self.window
            )));
        }
        if self.max_deriv > self.polyorder {
            return Err(Error::InvalidFilter(format!(
                "max_deriv {} exceeds polyorder {}",
                self.max_deriv, self.polyorder
            )));
        }
        Ok(())
    }

    pub fn half(&self) -> usize {
        self.window / 2
    }

    pub fn with_max_deriv(self, max_deriv: usize) -> Self {
        Self { max_deriv, ..self }
    }
}

#[derive(Debug, Clone)]
pub struct SavitzkyGolay {
    cfg: SgConfig,
    /// Taps per derivative order for unit sample spacing, indexed by offset `-h..=h`.
    taps: Vec<Vec<f64>>,
}

impl SavitzkyGolay {
    pub fn new(cfg: SgConfig) -> Result<Self> {
        cfg.validate()?;
        let h = cfg.half();
        let p = cfg.polyorder;
        let nodes: Vec<f64> = (0..cfg.window)
            .map(|i| (i as f64 - h as f64) / h as f64)
            .collect();

        // Gram polynomials at the nodes and their derivatives at the centre.
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
        let mut at_zero: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
        let mut norms = Vec::with_capacity(p + 1);
        values.push(vec![1.0; cfg.window]);
        let mut d0 = vec![0.0; cfg.max_deriv + 1];
        d0[0] = 1.0;
        at_zero.push(d0);
        norms.push(cfg.window as f64);
        for k in 0..p {
            let alpha = nodes
                .iter()
                .zip(&values[k])
                .map(|(z, v)| z * v * v)
                .sum::<f64>()
                / norms[k];
            let beta = if k == 0 { 0.0 } else { norms[k] / norms[k - 1] };
            let next: Vec<f64> = (0..cfg.window)
                .map(|i| {
                    let prev = if k == 0 { 0.0 } else { values[k - 1][i] };
                    (nodes[i] - alpha) * values[k][i] - beta * prev
                })
                .collect();
            let next_d: Vec<f64> = (0..=cfg.max_deriv)
                .map(|d| {
                    let lower = if d == 0 {
                        0.0
                    } else {
                        d as f64 * at_zero[k][d - 1]
                    };
                    let prev = if k == 0 { 0.0 } else { at_zero[k - 1][d] };
                    -alpha * at_zero[k][d] + lower - beta * prev
                })
                .collect();
            norms.push(next.iter().map(|v| v * v).sum());
            values.push(next);
            at_zero.push(next_d);
        }

        let taps = (0..=cfg.max_deriv)
            .map(|d| {
                let scale = (h as f64).powi(-(d as i32));
                (0..cfg.window)
                    .map(|i| {
                        (0..=p)
                            .map(|k| values[k][i] * at_zero[k][d] / norms[k])
                            .sum::<f64>()
                            * scale
                    })
                    .collect()
            })
            .collect();
        Ok(Self { cfg, taps })
    }

    pub fn config(&self) -> &SgConfig {
        &self.cfg
    }

    /// Taps of the `deriv`-th derivative for unit sample spacing.
    pub fn taps(&self, deriv: usize) -> &[f64] {
        &self.taps[deriv]
    }

    /// Interior derivative estimates of a real series; output `i` corresponds
    /// to input sample `i + half`.
    pub fn apply_real(&self, series: &[f64], deriv: usize, dt: f64) -> Result<Vec<f64>> {
        self.check_len(series.len())?;
        let taps = &self.taps[deriv];
        let scale = dt.powi(-(deriv as i32));
        Ok(series
            .windows(self.cfg.window)
            .map(|w| w.iter().zip(taps).map(|(x, c)| x * c).sum::<f64>() * scale)
            .collect())
    }

    pub fn apply_complex(
        &self,
        series: &[Complex64],
        deriv: usize,
        dt: f64,
    ) -> Result<Vec<Complex64>> {
        self.check_len(series.len())?;
        let taps = &self.taps[deriv];
        let scale = dt.powi(-(deriv as i32));
        Ok(series
            .windows(self.cfg.window)
            .map(|w| {
                let (mut re, mut im) = (0.0, 0.0);
                for (x, c) in w.iter().zip(taps) {
                    re += x.re * c;
                    im += x.im * c;
                }
                Complex64::new(re * scale, im * scale)
            })
            .collect())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n < self.cfg.window {
            return Err(Error::TooShort {
                have: n,
                need: self.cfg.window,
            });
        }
        Ok(())
    }

    /// Numeric stack over the interior grid: order 0 holds the raw samples,
    /// orders `1..=max_deriv` the filtered derivatives.
    pub fn differentiate(&self, traj: &Trajectory) -> Result<DerivativeStack> {
        self.check_len(traj.len())?;
        let h = self.cfg.half();
        let grid = traj.grid();
        let n_out = traj.len() - 2 * h;
        let times = (0..n_out).map(|i| grid.time(i + h)).collect();
        let m = traj.elements();
        let mut stack = DerivativeStack::zeros(times, m, self.cfg.max_deriv, StackSource::Numeric);
        for e in 0..m {
            let row = traj.row(e);
            for i in 0..n_out {
                stack.derivative_mut(i, 0)[e] = row[i + h];
            }
            for d in 1..=self.cfg.max_deriv {
                let out = self.apply_complex(row, d, grid.dt)?;
                for (i, z) in out.into_iter().enumerate() {
                    stack.derivative_mut(i, d)[e] = z;
                }
            }
        }
        Ok(stack)
    }
}

pub fn numerical_derivatives(traj: &Trajectory, cfg: &SgConfig) -> Result<DerivativeStack> {
    SavitzkyGolay::new(*cfg)?.differentiate(traj)
}
