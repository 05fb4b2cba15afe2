//! Spectral toolkit for nonlinear dispersive equations with non-decaying
//! (in particular almost-periodic) initial data.
//!
//! The toolkit is organised around the dispersion-adapted uniform local
//! Sobolev norm: a field localised to dyadic frequency `N` is measured in
//! `L^2` over sliding windows of side `N^sigma`, where `sigma + 1` is the
//! order of the dispersion relation. On top of that norm sit a
//! Littlewood-Paley / paraproduct calculus, the linear propagator, Picard
//! and regularized Galerkin solution schemes, frequency envelopes, and a
//! seeded randomized harness that checks every estimate the solver relies
//! on at desk scale.
//!
//! Two interchangeable field backends are provided:
//!
//! * [`TrigPoly`]: exact arithmetic on finite trigonometric polynomials
//!   over a frequency Z-module, so spectrum-containment claims can be
//!   checked exactly;
//! * [`GridField`]: a periodic-torus FFT proxy used for randomized
//!   inequality testing and as a cross-check backend.

pub mod config;
pub mod dyadic;
pub mod error;
pub mod field;
pub mod gridfield;
pub mod lp;
pub mod norms;
pub mod propagator;
pub mod quad;
pub mod solver;
pub mod symbols;
pub mod trigpoly;
pub mod verify;

mod bump;
pub mod stats;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use field::SpectralField;
pub use gridfield::{AmplitudeLaw, GridField};
pub use lp::{BumpProfile, Paraproduct};
pub use norms::{CutoffFamily, NormReport, NormVariant, SupMode};
pub use solver::{EnvelopeSequence, EquationSpec, NlSpec, QSpec, SolveConfig, Trajectory};
pub use symbols::{DispersionSymbol, ValidationReport};
pub use trigpoly::{FreqVec, FrequencyModule, TrigPoly};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
