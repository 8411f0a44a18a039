//! Wideband direction-of-arrival estimation on the dynamic observation
//! manifold of sparse arrays.
//!
//! An `M`-element array observing a frequency-modulated far-field source
//! traces a curve `x(t)` on the sphere of radius `√M` in `ℂ^M`. Its velocity
//! is `Ωx` for the diagonal anti-Hermitian generator
//! `Ω = diag(jω(t − τ_m))`, and its Frenet–Serret curvatures depend on the
//! direction of arrival through the delay spread. The crate synthesizes such
//! observations, extracts their geometry, and estimates the angle with a
//! coherent velocity matcher, a curvature matcher and narrowband MUSIC.
//!
//! ```
//! use manifold_doa::prelude::*;
//!
//! let model = SignalModel::lfm();
//! let geom = ArrayGeometry::linear(&[0.0, 5.0, 10.0], half_wavelength(2e9), DelayReference::Centroid)?;
//! let grid = SamplingGrid::new(20e-9, default_dt(&model, 32.0), 2000)?;
//! let x = synthesize(&model, &geom, 30f64.to_radians(), &grid)?;
//! let stack = numerical_derivatives(&x, &SgConfig::default())?;
//! let kappa = curvature_series(&stack)?;
//! assert!((kappa.mean_kappa1() - 1.0 / 3f64.sqrt()).abs() < 1e-2);
//! # Ok::<(), manifold_doa::Error>(())
//! ```

pub mod array;
pub mod error;
pub mod estimators;
pub mod generator;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod sg;
pub mod signal;
pub mod synthesis;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::array::{half_wavelength, ArrayGeometry, DelayReference, DelayStats};
    pub use crate::estimators::{
        framework1_spectrum, framework2_spectrum, music_spectrum, pick_estimate, Estimate,
        EstimatorConfig, Spectrum, SpectrumKind, ThetaGrid,
    };
    pub use crate::generator::{
        analytic_derivatives, build_operator_stack, DerivativeStack, OperatorStack,
    };
    pub use crate::geometry::{
        curvature_analytic, curvature_projection, curvature_series, frenet_frame, torsion_analytic,
        torsion_projection, CurvatureSeries,
    };
    pub use crate::sg::{numerical_derivatives, SgConfig};
    pub use crate::signal::{SignalModel, Support, Waveform};
    pub use crate::synthesis::{
        add_noise, apply_phase_error, default_dt, synthesize, NoiseModel, PhaseErrorModel,
        SamplingGrid, Trajectory,
    };
}
