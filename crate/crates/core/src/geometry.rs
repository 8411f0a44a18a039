//! Frenet–Serret geometry of the observation trajectory.
//!
//! All projections use the real inner product `Re(uᴴw)`, i.e. the trajectory
//! is treated as a curve in `ℝ^{2M}`.

use num_complex::Complex64;

use crate::array::ArrayGeometry;
use crate::error::{invalid, Result};
use crate::generator::{check_order, norm, re_dot, DerivativeStack};
use crate::linalg::symmetric_eigen;
use crate::signal::SignalModel;
use crate::synthesis::Trajectory;

/// A residual counts as zero below this fraction of its pre-projection norm.
pub const DEGENERACY_FLOOR: f64 = 1e-6;

pub mod flags {
    /// Principal normal undefined (acceleration parallel to velocity).
    pub const U2_UNDEFINED: u8 = 1;
    /// Binormal undefined (jerk inside the osculating plane).
    pub const U3_UNDEFINED: u8 = 2;
}

#[derive(Debug, Clone)]
pub struct FrameSample {
    pub u1: Vec<Complex64>,
    pub u2: Option<Vec<Complex64>>,
    pub u3: Option<Vec<Complex64>>,
    pub c1: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone)]
pub struct FrameSeries {
    pub times: Vec<f64>,
    pub samples: Vec<FrameSample>,
}

#[derive(Debug, Clone)]
pub struct CurvatureSeries {
    pub times: Vec<f64>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<Option<f64>>,
    pub speed: Vec<f64>,
    pub flags: Vec<u8>,
}

impl CurvatureSeries {
    pub fn mean_kappa1(&self) -> f64 {
        self.kappa1.iter().sum::<f64>() / self.kappa1.len() as f64
    }
}

fn axpy(y: &mut [Complex64], a: f64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

fn scaled(x: &[Complex64], a: f64) -> Vec<Complex64> {
    x.iter().map(|z| z * a).collect()
}

/// Part of `w` orthogonal (real inner product) to the orthonormal `basis`,
/// by modified Gram–Schmidt.
fn reject(w: &[Complex64], basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut r = w.to_vec();
    for u in basis {
        let c = re_dot(u, &r);
        axpy(&mut r, -c, u);
    }
    r
}

pub fn frenet_frame(stack: &DerivativeStack) -> Result<FrameSeries> {
    check_order(stack, 3)?;
    let samples = (0..stack.len())
        .map(|n| {
            let (v, a, j) = (stack.v(n), stack.acc(n), stack.jerk(n));
            let u1 = scaled(v, 1.0 / norm(v));
            let c1 = re_dot(&u1, a);
            let mut pa = a.to_vec();
            axpy(&mut pa, -c1, &u1);
            let npa = norm(&pa);
            let u2 = (npa > DEGENERACY_FLOOR * norm(a)).then(|| scaled(&pa, 1.0 / npa));
            let d1 = re_dot(&u1, j);
            let d2 = u2.as_ref().map_or(0.0, |u2| re_dot(u2, j));
            let u3 = u2.as_ref().and_then(|u2| {
                let mut pj = j.to_vec();
                axpy(&mut pj, -d1, &u1);
                axpy(&mut pj, -d2, u2);
                let npj = norm(&pj);
                (npj > DEGENERACY_FLOOR * norm(j)).then(|| scaled(&pj, 1.0 / npj))
            });
            FrameSample {
                u1,
                u2,
                u3,
                c1,
                d1,
                d2,
            }
        })
        .collect();
    Ok(FrameSeries {
        times: stack.times.clone(),
        samples,
    })
}

/// `κ₁ = ‖P_v^⊥ a‖ / ‖v‖²`.
pub fn curvature_projection(stack: &DerivativeStack) -> Result<Vec<f64>> {
    check_order(stack, 2)?;
    Ok((0..stack.len())
        .map(|n| kappa1_at(stack.v(n), stack.acc(n)))
        .collect())
}

fn kappa1_at(v: &[Complex64], a: &[Complex64]) -> f64 {
    let vv = re_dot(v, v);
    let va = re_dot(v, a);
    let aa = re_dot(a, a);
    // ‖a − (⟨v,a⟩/‖v‖²) v‖² without forming the vector.
    let perp2 = (aa - va * va / vv).max(0.0);
    let direct = perp2.sqrt() / vv;
    if perp2 > 1e-8 * aa {
        direct
    } else {
        // Cancellation regime: project explicitly.
        let mut pa = a.to_vec();
        axpy(&mut pa, -va / vv, v);
        norm(&pa) / vv
    }
}

/// `κ₂ = ‖P_osc^⊥ j‖ / (κ₁ ‖v‖³)`; `None` where the osculating plane or the
/// binormal is degenerate.
pub fn torsion_projection(stack: &DerivativeStack, kappa1: &[f64]) -> Result<Vec<Option<f64>>> {
    check_order(stack, 3)?;
    if kappa1.len() != stack.len() {
        return Err(invalid("kappa1", "length differs from the stack"));
    }
    Ok((0..stack.len())
        .map(|n| torsion_at(stack.v(n), stack.acc(n), stack.jerk(n), kappa1[n]))
        .collect())
}

fn torsion_at(v: &[Complex64], a: &[Complex64], j: &[Complex64], kappa1: f64) -> Option<f64> {
    let nv = norm(v);
    let u1 = scaled(v, 1.0 / nv);
    let pa = reject(a, std::slice::from_ref(&u1));
    let npa = norm(&pa);
    if npa <= DEGENERACY_FLOOR * norm(a) {
        return None;
    }
    let u2 = scaled(&pa, 1.0 / npa);
    let pj = reject(j, &[u1, u2]);
    let npj = norm(&pj);
    if npj <= DEGENERACY_FLOOR * norm(j) {
        return None;
    }
    Some(npj / (kappa1 * nv.powi(3)))
}

/// κ₁ for every sample, plus κ₂ when the stack carries the jerk.
pub fn curvature_series(stack: &DerivativeStack) -> Result<CurvatureSeries> {
    let kappa1 = curvature_projection(stack)?;
    let kappa2 = if stack.order() >= 3 {
        torsion_projection(stack, &kappa1)?
    } else {
        vec![None; stack.len()]
    };
    let speed: Vec<f64> = (0..stack.len()).map(|n| norm(stack.v(n))).collect();
    let flags = (0..stack.len())
        .map(|n| {
            let (v, a) = (stack.v(n), stack.acc(n));
            let mut f = 0;
            let pa = reject(a, &[scaled(v, 1.0 / norm(v))]);
            if norm(&pa) <= DEGENERACY_FLOOR * norm(a) {
                f |= flags::U2_UNDEFINED | flags::U3_UNDEFINED;
            } else if kappa2[n].is_none() {
                f |= flags::U3_UNDEFINED;
            }
            f
        })
        .collect();
    Ok(CurvatureSeries {
        times: stack.times.clone(),
        kappa1,
        kappa2,
        speed,
        flags,
    })
}

/// Closed-form curvature split into its hypersphere and dynamic parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureApprox {
    pub kappa1: f64,
    pub kappa_geo: f64,
    pub kappa_dyn: f64,
}

/// `κ₁ ≈ √(κ_geo² + κ_dyn²)` with `κ_geo = 1/√M` and
/// `κ_dyn = (2/√M)(ω̇/ω)·std(τ)`.
///
/// The frequency ratio is taken at `t − mean(τ)`, the instant seen at the
/// array centroid, so the law does not depend on the delay reference.
pub fn curvature_analytic(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta: f64,
    t: f64,
) -> CurvatureApprox {
    let tau = geom.delays(theta);
    let m = tau.len() as f64;
    let mean = tau.iter().sum::<f64>() / m;
    let stats = crate::array::delay_stats_of(&tau);
    let tc = t - mean;
    let ratio = model.nth_frequency_derivative(tc, 1) / model.frequency(tc);
    let kappa_geo = 1.0 / m.sqrt();
    let kappa_dyn = 2.0 / m.sqrt() * ratio * stats.std_tau;
    CurvatureApprox {
        kappa1: kappa_geo.hypot(kappa_dyn),
        kappa_geo,
        kappa_dyn,
    }
}

/// `κ₂ ≈ |κ_dyn|`.
pub fn torsion_analytic(model: &SignalModel, geom: &ArrayGeometry, theta: f64, t: f64) -> f64 {
    curvature_analytic(model, geom, theta, t).kappa_dyn.abs()
}

#[derive(Debug, Clone)]
pub struct GeneralizedFrameSample {
    /// Orthonormal `u_1 … u_r`.
    pub vectors: Vec<Vec<Complex64>>,
    /// `κ_1 … κ_{r−1}`.
    pub kappas: Vec<f64>,
}

impl GeneralizedFrameSample {
    pub fn order(&self) -> usize {
        self.vectors.len()
    }
}

#[derive(Debug, Clone)]
pub struct GeneralizedFrame {
    pub times: Vec<f64>,
    pub samples: Vec<GeneralizedFrameSample>,
}

impl GeneralizedFrame {
    /// Smallest frame order reached over the series.
    pub fn achieved_order(&self) -> usize {
        self.samples.iter().map(|s| s.order()).min().unwrap_or(0)
    }
}

/// Frame of order up to `k` from the successive derivatives by modified
/// Gram–Schmidt, with `κ_i = ‖x_⊥^{(i+1)}‖ / (κ_1⋯κ_{i−1} ‖v‖^{i+1})`.
/// A sample whose next derivative is dependent on the frame so far stops
/// there.
pub fn generalized_frame(stack: &DerivativeStack, k: usize) -> Result<GeneralizedFrame> {
    if k == 0 || k > 2 * stack.elements() {
        return Err(invalid(
            "k",
            format!("frame order must lie in 1..={}", 2 * stack.elements()),
        ));
    }
    check_order(stack, k)?;
    let samples = (0..stack.len())
        .map(|n| {
            let v = stack.v(n);
            let speed = norm(v);
            let mut vectors = vec![scaled(v, 1.0 / speed)];
            let mut kappas: Vec<f64> = Vec::new();
            for i in 1..k {
                let d = stack.derivative(n, i + 1);
                let r = reject(d, &vectors);
                let nr = norm(&r);
                if nr <= DEGENERACY_FLOOR * norm(d) {
                    break;
                }
                let prod: f64 = kappas.iter().product();
                kappas.push(nr / (prod * speed.powi(i as i32 + 1)));
                vectors.push(scaled(&r, 1.0 / nr));
            }
            GeneralizedFrameSample { vectors, kappas }
        })
        .collect();
    Ok(GeneralizedFrame {
        times: stack.times.clone(),
        samples,
    })
}

/// `∫ √(Σ_m ω²(ξ − τ_m)) dξ` over `[t0, t1]` by adaptive Simpson quadrature.
pub fn arc_length_between(
    model: &SignalModel,
    geom: &ArrayGeometry,
    theta: f64,
    t0: f64,
    t1: f64,
) -> f64 {
    let tau = geom.delays(theta);
    let f = |xi: f64| -> f64 {
        tau.iter()
            .map(|&t| model.frequency(xi - t).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    // Split first so the oscillating waveforms cannot fool the error estimate.
    let pieces = 64;
    let h = (t1 - t0) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let a = t0 + i as f64 * h;
            let b = a + h;
            let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(&f, a, b, fa, fm, fb, whole, 1e-11 * whole.abs(), 40)
        })
        .sum()
}

pub fn arc_length(model: &SignalModel, geom: &ArrayGeometry, theta: f64, t_end: f64) -> f64 {
    arc_length_between(model, geom, theta, 0.0, t_end)
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1)
}

/// Cumulative trapezoid of `‖v‖` along the stack, starting at zero.
pub fn cumulative_arc_length(stack: &DerivativeStack) -> Vec<f64> {
    let mut out = Vec::with_capacity(stack.len());
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..stack.len() {
        let h = stack.times[n] - stack.times[n - 1];
        acc += 0.5 * h * (norm(stack.v(n)) + norm(stack.v(n - 1)));
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub coords: Vec<[f64; 3]>,
    /// Covariance eigenvalues of the real embedding, descending.
    pub variances: Vec<f64>,
}

/// Real-embeds each sample as `(Re x, Im x)`, centres, and projects onto the
/// three leading principal directions.
pub fn embed_3d(traj: &Trajectory) -> Result<Embedding> {
    let n = traj.len();
    if n <= 3 {
        return Err(invalid("trajectory", "need more than three samples"));
    }
    let m = traj.elements();
    let dim = 2 * m;
    let real = |e: usize, i: usize| -> f64 {
        let z = traj.at(e % m, i);
        if e < m {
            z.re
        } else {
            z.im
        }
    };
    let mean: Vec<f64> = (0..dim)
        .map(|e| (0..n).map(|i| real(e, i)).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![0.0; dim * dim];
    for i in 0..n {
        let row: Vec<f64> = (0..dim).map(|e| real(e, i) - mean[e]).collect();
        for a in 0..dim {
            for b in a..dim {
                cov[a * dim + b] += row[a] * row[b] / n as f64;
            }
        }
    }
    for a in 0..dim {
        for b in 0..a {
            cov[a * dim + b] = cov[b * dim + a];
        }
    }
    let (mut vals, mut vecs) = symmetric_eigen(&cov, dim);
    vals.reverse();
    vecs.reverse();
    let axes = dim.min(3);
    let coords = (0..n)
        .map(|i| {
            let mut c = [0.0; 3];
            for (k, axis) in vecs.iter().take(axes).enumerate() {
                c[k] = (0..dim).map(|e| (real(e, i) - mean[e]) * axis[e]).sum();
            }
            c
        })
        .collect();
    Ok(Embedding {
        coords,
        variances: vals.into_iter().map(|v| v.max(0.0)).collect(),
    })
}
