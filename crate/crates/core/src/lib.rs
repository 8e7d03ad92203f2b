//! Best linear unbiased estimation of the mean of a stationary sequence.
//!
//! The crate works from a [`SpectralMeasure`] (density model plus optional
//! point masses) and builds covariances, Toeplitz and orthogonal-polynomial
//! solutions for the BLUE, competing estimators, efficiency laws, and
//! Chebyshev-type decay diagnostics for deterministic spectra.
//!
//! Sampling convention: an estimator "of order `n`" uses the `n + 1`
//! observations `X(0), ..., X(n)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariance;
pub mod dd;
pub mod deterministic;
pub mod efficiency;
mod error;
pub mod estimators;
pub mod opuc;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod spectra;
pub mod toeplitz;

use serde::{Deserialize, Serialize};

pub use num_complex::Complex64;

pub use covariance::{covariance_sequence, CovarianceSequence, Provenance};
pub use dd::{DoubleDouble, Real};
pub use deterministic::{ArcRegion, ChebyshevSolution, DecayFit, Neutrality, PrecisionMode};
pub use efficiency::{EfficiencyLaw, EfficiencyReport, Horizon};
pub use error::{Error, Result};
pub use estimators::{EstimatorWeights, WeightLabel};
pub use opuc::{OpucState, SzegoFunctionEval};
pub use simulate::{Generator, MonteCarloEstimate, PathBatch};
pub use spectra::{Atom, Classification, SpectralMeasure, SpectralModel, SzegoIntegral};
pub use toeplitz::{blue_solve, quadratic_form, BlueSolution};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Working precision of the Toeplitz and moment computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    #[serde(rename = "dd")]
    DoubleDouble,
}
