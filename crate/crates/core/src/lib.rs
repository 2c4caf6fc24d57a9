//! Plug-in and direct multistep least-squares prediction for autoregressions
//! with a unit root: asymptotic loss constants, estimators, order/method
//! selection and Monte Carlo experiments.
//!
//! The crate is `no_std` with `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod prediction;
pub mod predictor;
pub mod selection;
pub mod series;
pub mod simulation;
pub mod theory;

pub use error::{Error, Result};
pub use estimation::{fit_direct, fit_one_step, fitted_ma_weights, plug_in_multi, residual_mse, FittedCoefficients};
pub use model::{ArModel, StationaryArModel, UnitRootArModel};
pub use prediction::{predict, Forecast};
pub use predictor::{Method, PredictorSpec};
pub use selection::{procedure_i, procedure_ii, PenaltyWeight, Procedure, SelectionOutcome};
pub use series::TimeSeries;
