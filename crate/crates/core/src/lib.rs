//! Order-constrained spectral causality for multivariate time series.
//!
//! The crate builds lag-indexed second-order dependence operators between a
//! source block and a target block of a panel, summarizes how their spectra
//! vary across an admissible lag set, and calibrates that variation with
//! circular-shift randomization. A rolling monitor applies the same
//! construction window by window, and a simulation harness provides the data
//! generating processes used to check size and power.
//!
//! ```
//! use spectral_causality::prelude::*;
//! use nalgebra::DMatrix;
//!
//! // x drives y with a two-step delay
//! let t = 400;
//! let mut state = 1u64;
//! let mut noise = move || {
//!     state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
//!     ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
//! };
//! let x: Vec<f64> = (0..t).map(|_| noise()).collect();
//! let y: Vec<f64> = (0..t).map(|i| noise() + if i >= 2 { 0.9 * x[i - 2] } else { 0.0 }).collect();
//! let panel = TimeSeriesPanel::from_columns(vec!["x".into(), "y".into()], &[x, y]).unwrap();
//!
//! let spec = EmbeddingSpec::linear(vec![0], vec![1], 1, 1);
//! let lags = DeformationSet::uniform(1..=4).unwrap();
//! let result = randomization_test(
//!     &panel,
//!     &spec,
//!     &lags,
//!     OperatorKind::DirectedCoherenceGram,
//!     DEFAULT_RIDGE,
//!     TestStatistic::Dispersion { summary: SpectralSummary::Trace },
//!     &RandomizationPlan::new(99, 1),
//! )
//! .unwrap();
//! assert!(result.p_value <= 0.05);
//! ```

pub mod embedding;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod monitor;
pub mod operators;
pub mod panel;
pub mod simulation;
pub mod spectral;

pub use error::{Error, Result};

/// Common imports.
pub mod prelude {
    pub use crate::embedding::{circular_shift, embed, residualize, DeformationSet, EmbeddingSpec, FeatureMap, ScalarTransform};
    pub use crate::error::{Error, Result};
    pub use crate::inference::{
        detect_episodes, randomization_test, two_sided_p, upper_p, RandomizationPlan, ShiftSampler, Tail, TestResult,
        TestStatistic,
    };
    pub use crate::linalg::{inv_sqrt_psd, sample_covariance, sym_eig, EigenSystem, SymMatrix};
    pub use crate::operators::{
        build_coherence, build_family, build_stacked, DirectedCoherence, OperatorFamily, OperatorKind, DEFAULT_RIDGE,
    };
    pub use crate::panel::{TimeSeriesPanel, TimeStamp};
    pub use crate::spectral::{
        dispersion_measure, dispersion_scalar, effective_rank, lss, spectral_measure_distance, DispersionResult,
        SpectralMeasure, SpectralSummary,
    };
}
