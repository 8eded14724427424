//! Estimators of the bivariate Hurst exponent `H_xy`, the exponent of
//! power-law cross-correlations `ρ_xy(k) ∝ k^{2H_xy − 2}` (equivalently
//! `|f_xy(λ)| ∝ λ^{1 − 2H_xy}` near the origin), together with α-stable
//! series generation and a reproducible Monte Carlo harness for studying
//! estimator behaviour under heavy tails.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below name the common instantiations.

// `!(x > 0)` is how parameter checks reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimators;
pub mod fit;
pub mod freq_domain;
pub mod io;
pub mod montecarlo;
pub mod plot;
pub mod scalar;
pub mod series_gen;
pub mod stable_dist;
pub mod time_domain;

pub use error::{Error, FailureClass, Result};
pub use estimators::{EstimatorConfig, EstimatorId, PreparedPair};
pub use freq_domain::{ApeMode, CrossPeriodogram, FreqEstimatorConfig};
pub use montecarlo::{EstimateRecord, ExperimentConfig, Outcome, SummaryRow, SummaryStats};
pub use scalar::Real;
pub use series_gen::{PairMeta, SeriesPair, SettingTag, SimulationSetting};
pub use stable_dist::StableParams;
pub use time_domain::{Aggregation, DccaConfig, DmcaConfig, FluctuationCurve, HxaConfig, ScaleGrid};

pub type StableParams64 = StableParams<f64>;
pub type StableParams32 = StableParams<f32>;
pub type SeriesPair64 = SeriesPair<f64>;
pub type SeriesPair32 = SeriesPair<f32>;
pub type SimulationSetting64 = SimulationSetting<f64>;
pub type CrossPeriodogram64 = CrossPeriodogram<f64>;
pub type CrossPeriodogram32 = CrossPeriodogram<f32>;
pub type FluctuationCurve64 = FluctuationCurve<f64>;
