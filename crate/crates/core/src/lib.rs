//! Segmented calibration of the Cox-Ingersoll-Ross short-rate model.
//!
//! A rate series is split into groups, translated away from zero when
//! needed, and each group is fitted with ARIMA models whose normalised
//! residuals drive a Milstein-discretised CIR path. The mean-reversion
//! speed is chosen to minimise the dispersion between that path and the
//! observations. Rolling one-step forecasts and a classical martingale
//! estimating-function baseline are provided for comparison.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arima;
pub mod cir;
pub mod config;
pub mod error;
pub mod johnson;
pub mod market_data;
pub mod optim;
pub mod report;
pub mod pipeline;
pub mod segmentation;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
