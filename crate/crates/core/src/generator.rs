//! The dynamic generator `Ω = diag(jω(t − τ_m))`, its time derivatives, and
//! the derivative stacks it produces.
//!
//! Every operator here is diagonal, so products are element-wise and all
//! operators commute.

use num_complex::Complex64;

use crate::array::{steering_from_delays, ArrayGeometry};
use crate::error::{invalid, Error, Result};
use crate::signal::SignalModel;
use crate::synthesis::{check_support, SamplingGrid};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Real ("wide-sense") inner product `Re(uᴴw)`.
pub fn re_dot(u: &[Complex64], w: &[Complex64]) -> f64 {
    u.iter()
        .zip(w)
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum()
}

pub fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    pub diag: Vec<Complex64>,
}

impl DiagonalOperator {
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.diag.iter().zip(x).map(|(d, v)| d * v).collect()
    }

    /// `max |Re diag|`, zero for an anti-Hermitian diagonal.
    pub fn hermitian_part(&self) -> f64 {
        self.diag.iter().map(|d| d.re.abs()).fold(0.0, f64::max)
    }
}

/// `Ω`, `Ω̇`, `Ω̈` at a single sample.
#[derive(Debug, Clone, Copy)]
pub struct OperatorsAt<'a> {
    pub omega: &'a [Complex64],
    pub omega_dot: &'a [Complex64],
    pub omega_ddot: &'a [Complex64],
}

#[derive(Debug, Clone)]
pub struct OperatorStack {
    pub delays: Vec<f64>,
    pub times: Vec<f64>,
    m: usize,
    omega: Vec<Complex64>,
    omega_dot: Vec<Complex64>,
    omega_ddot: Vec<Complex64>,
}

impl OperatorStack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn at(&self, n: usize) -> OperatorsAt<'_> {
        let r = n * self.m..(n + 1) * self.m;
        OperatorsAt {
            omega: &self.omega[r.clone()],
            omega_dot: &self.omega_dot[r.clone()],
            omega_ddot: &self.omega_ddot[r],
        }
    }

    pub fn generator(&self, n: usize) -> DiagonalOperator {
        DiagonalOperator {
            diag: self.at(n).omega.to_vec(),
        }
    }
}

pub fn build_operator_stack(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta: f64,
    grid: &SamplingGrid,
) -> Result<OperatorStack> {
    let delays = geom.delays(theta);
    check_support(model, &delays, grid)?;
    let m = delays.len();
    let n = grid.n_samples;
    let mut omega = Vec::with_capacity(m * n);
    let mut omega_dot = Vec::with_capacity(m * n);
    let mut omega_ddot = Vec::with_capacity(m * n);
    let mut w = [0.0; 3];
    for i in 0..n {
        let t = grid.time(i);
        for &tau in &delays {
            model.frequency_derivatives(t - tau, &mut w);
            omega.push(J * w[0]);
            omega_dot.push(J * w[1]);
            omega_ddot.push(J * w[2]);
        }
    }
    Ok(OperatorStack {
        delays,
        times: grid.times(),
        m,
        omega,
        omega_dot,
        omega_ddot,
    })
}

/// `v = Ωx`.
pub fn velocity(x: &[Complex64], ops: &OperatorsAt) -> Vec<Complex64> {
    x.iter().zip(ops.omega).map(|(x, w)| w * x).collect()
}

/// `a_cc = (Ω̇ + Ω²)x`.
pub fn acceleration(x: &[Complex64], ops: &OperatorsAt) -> Vec<Complex64> {
    (0..x.len())
        .map(|m| (ops.omega_dot[m] + ops.omega[m] * ops.omega[m]) * x[m])
        .collect()
}

/// `j = (Ω̈ + 3ΩΩ̇ + Ω³)x`.
pub fn jerk(x: &[Complex64], ops: &OperatorsAt) -> Vec<Complex64> {
    (0..x.len())
        .map(|m| {
            let (w, wd, wdd) = (ops.omega[m], ops.omega_dot[m], ops.omega_ddot[m]);
            (wdd + 3.0 * w * wd + w * w * w) * x[m]
        })
        .collect()
}

/// `j = (Ω̈ + 2Ω̇Ω + ΩΩ̇ + Ω³)x`, term by term without using commutativity.
pub fn jerk_literal(x: &[Complex64], ops: &OperatorsAt) -> Vec<Complex64> {
    let apply = |d: &[Complex64], v: &[Complex64]| -> Vec<Complex64> {
        d.iter().zip(v).map(|(a, b)| a * b).collect()
    };
    let t1 = apply(ops.omega_ddot, x);
    let t2 = apply(ops.omega_dot, &apply(ops.omega, x));
    let t3 = apply(ops.omega, &apply(ops.omega_dot, x));
    let t4 = apply(ops.omega, &apply(ops.omega, &apply(ops.omega, x)));
    (0..x.len())
        .map(|m| t1[m] + 2.0 * t2[m] + t3[m] + t4[m])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackSource {
    Analytic,
    Numeric,
}

/// Per-sample derivatives `x, ẋ, ẍ, …` up to `order`, stored sample-major.
#[derive(Debug, Clone)]
pub struct DerivativeStack {
    pub times: Vec<f64>,
    pub source: StackSource,
    m: usize,
    order: usize,
    data: Vec<Complex64>,
}

impl DerivativeStack {
    pub(crate) fn zeros(times: Vec<f64>, m: usize, order: usize, source: StackSource) -> Self {
        let len = times.len() * (order + 1) * m;
        Self {
            times,
            source,
            m,
            order,
            data: vec![ZERO; len],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn elements(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `k`-th derivative at sample `n` (`k = 0` is the position itself).
    pub fn derivative(&self, n: usize, k: usize) -> &[Complex64] {
        assert!(k <= self.order, "derivative order {k} not held");
        let start = (n * (self.order + 1) + k) * self.m;
        &self.data[start..start + self.m]
    }

    pub(crate) fn derivative_mut(&mut self, n: usize, k: usize) -> &mut [Complex64] {
        let start = (n * (self.order + 1) + k) * self.m;
        &mut self.data[start..start + self.m]
    }

    pub fn x(&self, n: usize) -> &[Complex64] {
        self.derivative(n, 0)
    }

    pub fn v(&self, n: usize) -> &[Complex64] {
        self.derivative(n, 1)
    }

    pub fn acc(&self, n: usize) -> &[Complex64] {
        self.derivative(n, 2)
    }

    pub fn jerk(&self, n: usize) -> &[Complex64] {
        self.derivative(n, 3)
    }

    /// Stack of `Γx` given the diagonal of `Γ`.
    pub fn rotated(&self, gains: &[Complex64]) -> Self {
        let mut out = self.clone();
        for chunk in out.data.chunks_mut(self.m) {
            chunk.iter_mut().zip(gains).for_each(|(z, g)| *z *= g);
        }
        out
    }

    /// Sample-wise relative L2 error against `reference` for derivative `k`,
    /// over the samples both stacks share by time.
    pub fn relative_error(&self, reference: &DerivativeStack, k: usize) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (n, &t) in self.times.iter().enumerate() {
            let Some(r) = reference.index_of(t) else {
                continue;
            };
            for (a, b) in self.derivative(n, k).iter().zip(reference.derivative(r, k)) {
                num += (a - b).norm_sqr();
                den += b.norm_sqr();
            }
        }
        (num / den).sqrt()
    }

    fn index_of(&self, t: f64) -> Option<usize> {
        let dt = if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            1.0
        };
        let i = ((t - self.times[0]) / dt).round();
        if i < 0.0 || i as usize >= self.times.len() {
            return None;
        }
        let i = i as usize;
        ((self.times[i] - t).abs() <= 1e-6 * dt).then_some(i)
    }
}

/// Exact derivatives of `x_m(t) = e^{jΦ(t − τ_m)}` up to `order`, via the
/// complete Bell polynomial recurrence in `jω, jω̇, jω̈, …`. Orders 1 to 3
/// reproduce `Ωx`, `(Ω̇ + Ω²)x` and `(Ω̈ + 3ΩΩ̇ + Ω³)x`.
pub fn analytic_derivatives(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta: f64,
    grid: &SamplingGrid,
    order: usize,
) -> Result<DerivativeStack> {
    let tau = geom.delays(theta);
    check_support(model, &tau, grid)?;
    let m = tau.len();
    let mut stack = DerivativeStack::zeros(grid.times(), m, order, StackSource::Analytic);
    let binom = binomials(order);
    let mut w = vec![0.0; order.max(1)];
    let mut bell = vec![ZERO; order + 1];
    for n in 0..grid.n_samples {
        let t = grid.time(n);
        for (e, &tk) in tau.iter().enumerate() {
            let u = t - tk;
            model.frequency_derivatives(u, &mut w);
            bell[0] = Complex64::new(1.0, 0.0);
            for k in 0..order {
                let mut acc = ZERO;
                for i in 0..=k {
                    acc += binom[k][i] * bell[k - i] * (J * w[i]);
                }
                bell[k + 1] = acc;
            }
            let x = model.sample(u);
            for (k, b) in bell.iter().enumerate() {
                stack.derivative_mut(n, k)[e] = b * x;
            }
        }
    }
    Ok(stack)
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut row = vec![1.0; k + 1];
        for i in 1..k {
            row[i] = rows[k - 1][i - 1] + rows[k - 1][i];
        }
        rows.push(row);
    }
    rows
}

/// `j[ω(t)I + Σ_{n=1}^{order} (−1)ⁿ/n! ω⁽ⁿ⁾(t) Tⁿ]`, the generator expanded in
/// the delays about the reference time.
pub fn taylor_truncated_operator(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta: f64,
    t: f64,
    order: usize,
) -> Result<DiagonalOperator> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let tau = geom.delays(theta);
    let mut w = [0.0; 3];
    model.frequency_derivatives(t, &mut w);
    let diag = tau
        .iter()
        .map(|&tk| {
            let mut s = w[0];
            let mut fact = 1.0;
            for (n, wn) in w.iter().enumerate().take(order + 1).skip(1) {
                fact *= n as f64;
                s += (-tk).powi(n as i32) / fact * wn;
            }
            J * s
        })
        .collect();
    Ok(DiagonalOperator { diag })
}

/// Exact generator at a single instant.
pub fn exact_operator(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta: f64,
    t: f64,
) -> DiagonalOperator {
    DiagonalOperator {
        diag: geom
            .delays(theta)
            .iter()
            .map(|&tk| J * model.frequency(t - tk))
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct AmbiguityResidual {
    pub times: Vec<f64>,
    /// `‖v(θ₁,t) − α v(θ₂,t)‖`.
    pub residual: Vec<f64>,
    /// `‖v(θ₁,t)‖`.
    pub reference: Vec<f64>,
    pub alpha: Complex64,
}

impl AmbiguityResidual {
    pub fn relative(&self) -> Vec<f64> {
        self.residual
            .iter()
            .zip(&self.reference)
            .map(|(r, v)| r / v)
            .collect()
    }
}

/// Residual of the velocity under the carrier's steering alias between two
/// angles. Fails if the angles are not aliased at the carrier.
pub fn ambiguity_residual(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta1: f64,
    theta2: f64,
    grid: &SamplingGrid,
) -> Result<AmbiguityResidual> {
    let wc = model.carrier_omega();
    let a1 = steering_from_delays(&geom.delays(theta1), wc);
    let a2 = steering_from_delays(&geom.delays(theta2), wc);
    let alpha = a1[0] * a2[0].conj();
    let alias = a1
        .iter()
        .zip(&a2)
        .map(|(p, q)| (p - alpha * q).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if alias > 1e-9 * (a1.len() as f64).sqrt() {
        return Err(Error::NotAliased { residual: alias });
    }
    let s1 = analytic_derivatives(model, geom, theta1, grid, 1)?;
    let s2 = analytic_derivatives(model, geom, theta2, grid, 1)?;
    let mut residual = Vec::with_capacity(s1.len());
    let mut reference = Vec::with_capacity(s1.len());
    for n in 0..s1.len() {
        let (v1, v2) = (s1.v(n), s2.v(n));
        residual.push(
            v1.iter()
                .zip(v2)
                .map(|(p, q)| (p - alpha * q).norm_sqr())
                .sum::<f64>()
                .sqrt(),
        );
        reference.push(norm(v1));
    }
    Ok(AmbiguityResidual {
        times: s1.times,
        residual,
        reference,
        alpha,
    })
}

/// Largest `|Re Ω_mm| / |Ω_mm|` over a stack; zero for an anti-Hermitian generator.
pub fn anti_hermitian_residual(ops: &OperatorStack) -> f64 {
    ops.omega
        .iter()
        .map(|w| w.re.abs() / w.norm())
        .fold(0.0, f64::max)
}

/// `|Re⟨Ω^{2k+1}x, Ω^{2m}x⟩| / (‖Ω^{2k+1}x‖‖Ω^{2m}x‖)` maximised over `k, m ∈ {0, 1}`.
pub fn odd_even_residual(x: &[Complex64], omega: &[Complex64]) -> f64 {
    let power =
        |p: i32| -> Vec<Complex64> { x.iter().zip(omega).map(|(x, w)| w.powi(p) * x).collect() };
    let mut worst: f64 = 0.0;
    for k in 0..2 {
        let odd = power(2 * k + 1);
        for m in 0..2 {
            let even = power(2 * m);
            let r = re_dot(&odd, &even).abs() / (norm(&odd) * norm(&even));
            worst = worst.max(r);
        }
    }
    worst
}

pub(crate) fn check_order(stack: &DerivativeStack, need: usize) -> Result<()> {
    if stack.order() < need {
        return Err(invalid(
            "order",
            format!(
                "stack holds derivatives up to {} but {need} are needed",
                stack.order()
            ),
        ));
    }
    Ok(())
}
