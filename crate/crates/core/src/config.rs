//! Run configuration: defaults, a flat TOML file, and command-line
//! overrides applied in that order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arima::DiagnosticsConfig;
use crate::cir::KSearch;
use crate::error::{Error, Result};
use crate::market_data::DEFAULT_SHIFT_THRESHOLD;
use crate::pipeline::{ChangePointConfig, PipelineConfig, SHRINK_STEP};
use crate::segmentation::{DEFAULT_GROUP_SIZE, DEFAULT_K_MAX, DEFAULT_MIN_SEGMENT_LEN};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CIRSHARP_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "cirsharp-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SegmentationMode {
    #[default]
    Fixed,
    ChangePoint,
}

impl std::str::FromStr for SegmentationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(SegmentationMode::Fixed),
            "change_point" | "change-point" => Ok(SegmentationMode::ChangePoint),
            other => Err(Error::Config(format!(
                "unknown segmentation mode `{other}` (expected fixed or change_point)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub maturities: Vec<String>,
    pub group_size: usize,
    pub segmentation: SegmentationMode,
    pub min_segment_len: usize,
    pub k_max: usize,
    pub shift_threshold: f64,
    pub alpha: f64,
    pub relax_pac: bool,
    pub k_lower: f64,
    pub k_upper: f64,
    pub k_grid_points: usize,
    pub k_tolerance: f64,
    /// Observation step in years; the loader's monthly default when absent.
    pub delta: Option<f64>,
    pub forecast_window: usize,
    pub classic_window: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ks = KSearch::default();
        RunConfig {
            input: None,
            maturities: Vec::new(),
            group_size: DEFAULT_GROUP_SIZE,
            segmentation: SegmentationMode::Fixed,
            min_segment_len: DEFAULT_MIN_SEGMENT_LEN,
            k_max: DEFAULT_K_MAX,
            shift_threshold: DEFAULT_SHIFT_THRESHOLD,
            alpha: crate::stats::DEFAULT_ALPHA,
            relax_pac: false,
            k_lower: ks.lower,
            k_upper: ks.upper,
            k_grid_points: ks.grid_points,
            k_tolerance: ks.tolerance,
            delta: None,
            forecast_window: 8,
            classic_window: 14,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.group_size < 8 {
            return bad(format!("group_size {} must be >= 8", self.group_size));
        }
        if self.min_segment_len < 2 {
            return bad(format!("min_segment_len {} must be >= 2", self.min_segment_len));
        }
        if self.k_max < 1 {
            return bad("k_max must be >= 1".into());
        }
        if !(self.shift_threshold > 0.0 && self.shift_threshold.is_finite()) {
            return bad(format!("shift_threshold {} must be > 0", self.shift_threshold));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} must lie in (0, 1)", self.alpha));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta {d} must be > 0"));
            }
        }
        if self.forecast_window < 8 {
            return bad(format!("forecast_window {} must be >= 8", self.forecast_window));
        }
        if self.classic_window < 14 {
            return bad(format!("classic_window {} must be >= 14", self.classic_window));
        }
        self.k_search().validate()
    }

    pub fn k_search(&self) -> KSearch {
        KSearch {
            lower: self.k_lower,
            upper: self.k_upper,
            grid_points: self.k_grid_points,
            tolerance: self.k_tolerance,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            diagnostics: DiagnosticsConfig {
                alpha: self.alpha,
                relax_pac: self.relax_pac,
                ..DiagnosticsConfig::default()
            },
            k_search: self.k_search(),
            shift_threshold: self.shift_threshold,
            shrink_step: SHRINK_STEP,
        }
    }

    pub fn change_points(&self) -> ChangePointConfig {
        ChangePointConfig {
            k_max: self.k_max,
            min_segment_len: self.min_segment_len,
        }
    }

    /// Output directory: configured value, else the environment variable,
    /// else [`DEFAULT_OUT_DIR`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}
