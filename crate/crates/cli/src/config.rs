//! Run configuration: a flat TOML file, overridden by command-line flags.
//!
//! Every key is optional; missing keys take the defaults below. Paths live
//! in a `[paths]` table. Example:
//!
//! ```toml
//! seed = 7
//! k = 6
//! threshold = 0.15
//! orders = [1, 2]
//! predictor_mode = "anomaly"
//!
//! [paths]
//! t1 = "data/t1.jsonl"
//! t2 = "data/t2.jsonl"
//! ```

use std::path::{Path, PathBuf};

use newsframe_core::datasets::{BootstrapParams, ForestParams};
use newsframe_core::framing::{FramingConfig, ScoreMode, ThresholdMode, DEFAULT_THRESHOLD};
use newsframe_core::keywords::{IgVariant, KeywordConfig};
use newsframe_core::legislation::{ChangeInput, LegislationParams, PredictorMode};
use newsframe_core::newscycle::CycleOptions;
use newsframe_core::semantics::Weighting;
use newsframe_core::NgramOrders;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub t1: Option<PathBuf>,
    pub t2: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub laws: Option<PathBuf>,
    pub series_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub universal: Option<PathBuf>,
    pub extra_negatives: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub topic: Option<String>,
    pub seed: u64,

    pub k: usize,
    pub j: usize,
    pub window: usize,
    pub weighting: Weighting,
    pub orders: NgramOrders,
    pub min_df: usize,
    pub ig_variant: IgVariant,
    /// Co-occurrence vocabulary cap; 0 keeps every token.
    pub max_vocab: usize,
    pub score_mode: ScoreMode,
    pub threshold_mode: ThresholdMode,
    pub threshold: f64,
    /// Scores of other topics, for the median and EM threshold modes.
    pub calibration_scores: Vec<f64>,

    pub cycle_orders: NgramOrders,
    pub global_vocab: bool,

    pub bins: usize,
    pub alpha: f64,
    pub predictor_mode: PredictorMode,
    pub t: f64,
    pub change_input: ChangeInput,

    pub n_trees: usize,
    pub max_depth: usize,
    pub feature_subsample: Option<f64>,
    pub bootstrap_orders: NgramOrders,
    pub bootstrap_min_df: usize,
    pub include_seeds_in_stage2: bool,

    pub max_pages: u32,
    pub requests_per_second: f64,

    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        let framing = FramingConfig::default();
        let legis = LegislationParams::default();
        let boot = BootstrapParams::default();
        Self {
            topic: None,
            seed: 0,
            k: framing.keywords.k,
            j: framing.j,
            window: framing.window,
            weighting: framing.weighting,
            orders: framing.keywords.orders,
            min_df: framing.keywords.min_df,
            ig_variant: framing.keywords.variant,
            max_vocab: framing.max_vocab.unwrap_or(0),
            score_mode: framing.score_mode,
            threshold_mode: framing.threshold_mode,
            threshold: DEFAULT_THRESHOLD,
            calibration_scores: Vec::new(),
            cycle_orders: CycleOptions::default().orders,
            global_vocab: false,
            bins: legis.bins,
            alpha: legis.alpha,
            predictor_mode: legis.mode,
            t: legis.t,
            change_input: ChangeInput::default(),
            n_trees: boot.forest.n_trees,
            max_depth: boot.forest.max_depth,
            feature_subsample: boot.forest.feature_subsample,
            bootstrap_orders: boot.orders,
            bootstrap_min_df: boot.min_df,
            include_seeds_in_stage2: boot.include_seeds_in_stage2,
            max_pages: 10,
            requests_per_second: 1.0,
            paths: Paths::default(),
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Input(format!("invalid config: {}", msg())))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check(self.k >= 1, || "k must be at least 1".into())?;
        check(self.j >= 1, || "j must be at least 1".into())?;
        check(self.window >= 1, || "window must be at least 1".into())?;
        check(self.min_df >= 1 && self.bootstrap_min_df >= 1, || "min_df must be at least 1".into())?;
        check(self.threshold.is_finite(), || format!("threshold {} is not finite", self.threshold))?;
        check(self.calibration_scores.iter().all(|s| s.is_finite()), || "calibration scores must be finite".into())?;
        check(self.bins >= 2, || format!("bins must be at least 2, got {}", self.bins))?;
        check(self.alpha.is_finite() && self.alpha >= 0.0, || format!("alpha must be >= 0, got {}", self.alpha))?;
        check(self.t > 0.0 && self.t < 1.0, || format!("t must lie in (0, 1), got {}", self.t))?;
        check(self.n_trees >= 1, || "n_trees must be at least 1".into())?;
        check(self.max_depth >= 1, || "max_depth must be at least 1".into())?;
        check(
            self.feature_subsample.is_none_or(|f| f > 0.0 && f <= 1.0),
            || "feature_subsample must lie in (0, 1]".into(),
        )?;
        check(self.max_pages >= 1, || "max_pages must be at least 1".into())?;
        check(
            self.requests_per_second.is_finite() && self.requests_per_second > 0.0,
            || "requests_per_second must be positive".into(),
        )?;
        Ok(())
    }

    pub fn framing(&self) -> FramingConfig {
        FramingConfig {
            keywords: KeywordConfig { k: self.k, orders: self.orders, min_df: self.min_df, variant: self.ig_variant },
            j: self.j,
            window: self.window,
            weighting: self.weighting,
            max_vocab: (self.max_vocab > 0).then_some(self.max_vocab),
            score_mode: self.score_mode,
            threshold_mode: self.threshold_mode,
            threshold: self.threshold,
            calibration_scores: self.calibration_scores.clone(),
        }
    }

    pub fn cycle(&self) -> CycleOptions {
        CycleOptions { orders: self.cycle_orders, global_vocab: self.global_vocab }
    }

    pub fn legislation(&self) -> LegislationParams {
        LegislationParams { bins: self.bins, alpha: self.alpha, mode: self.predictor_mode, t: self.t }
    }

    pub fn bootstrap(&self) -> BootstrapParams {
        BootstrapParams {
            forest: ForestParams {
                n_trees: self.n_trees,
                max_depth: self.max_depth,
                feature_subsample: self.feature_subsample,
                seed: self.seed,
            },
            orders: self.bootstrap_orders,
            min_df: self.bootstrap_min_df,
            include_seeds_in_stage2: self.include_seeds_in_stage2,
        }
    }
}
