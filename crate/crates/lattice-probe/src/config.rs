//! Run settings: command-line flags layered over an optional JSON config
//! file layered over defaults. The resolved settings are echoed into every
//! output directory as `run_config.json`, which is itself a valid config
//! file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::formats::{parse_json, read_text, NormName, PoolingName};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RankAxis {
    /// Rank objects for each attribute.
    Obj,
    /// Rank attributes for each object.
    Attr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TaskName {
    Reconstruction,
    Classification,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LabelingName {
    Full,
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LearnNormName {
    /// Divide counts by the largest count.
    Max,
    /// Divide each row by its sum.
    Row,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UpdateName {
    /// Draw the attribute given the freshly drawn object.
    Sequential,
    /// Draw both slots from the previous state.
    Simultaneous,
}

/// Every tunable setting. `None` means "not given at this layer".
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Output directory.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,

    /// Triadic tensor JSON.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tensor: Option<PathBuf>,

    /// Formal context JSON.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub context: Option<PathBuf>,

    /// Scores to evaluate: a pooled context or a formal context JSON.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scores: Option<PathBuf>,

    /// Gold formal context JSON, optionally with "metadata".
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gold: Option<PathBuf>,

    /// Pattern list JSON: [{"id", "template"}].
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub patterns: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pooling: Option<PoolingName>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub norm: Option<NormName>,

    /// Normalize each row separately instead of the whole matrix.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub row_norm: Option<bool>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigmoid_scale: Option<f64>,

    /// Sigmoid centre in log space; defaults to the mean log-score.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigmoid_shift: Option<f64>,

    /// Binarization threshold (strict `>`).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<RankAxis>,

    /// Cutoffs for hit@k.
    #[arg(long = "k", global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none", default, rename = "k")]
    pub ks: Option<Vec<usize>>,

    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub filtered: Option<bool>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub task: Option<TaskName>,

    /// Number of evenly spaced thresholds in the alpha curve.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<usize>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labeling: Option<LabelingName>,

    /// Merge identical rows and columns before building the lattice.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clarify: Option<bool>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,

    /// Corpus size.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,

    /// Probability of replacing a sentence's pair with a non-incident one.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub noise: Option<f64>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub learn_norm: Option<LearnNormName>,

    /// Convergence trials; 0 skips the experiment.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<usize>,

    /// Corpus sizes at which convergence is measured.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schedule: Option<Vec<usize>>,

    /// Provider endpoint URL, or `builtin` together with --joint.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provider: Option<String>,

    /// Joint weights for the built-in provider, as a pooled context JSON.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub joint: Option<PathBuf>,

    /// Pattern id to sample with; defaults to the first pattern.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pattern: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub steps: Option<usize>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub burn_in: Option<usize>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub update: Option<UpdateName>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub top_k: Option<usize>,

    /// Provider request timeout in seconds.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timeout: Option<u64>,
}

macro_rules! layer {
    ($top:expr, $base:expr; $($f:ident),* $(,)?) => {
        Options { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Options {
    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: Options) -> Options {
        layer!(self, base;
            out, tensor, context, scores, gold, patterns, pooling, norm, row_norm,
            sigmoid_scale, sigmoid_shift, alpha, direction, ks, filtered, task, sweep,
            labeling, clarify, seed, n, noise, learn_norm, trials, schedule, provider,
            joint, pattern, steps, burn_in, update, top_k, timeout,
        )
    }

    /// Reads a config file. A `subcommand` key, as written in echoed
    /// configs, is accepted and ignored. Relative paths in the file are
    /// taken relative to the file's directory.
    pub fn from_file(path: &Path) -> CliResult<Options> {
        let origin = path.display().to_string();
        let mut value: serde_json::Map<String, serde_json::Value> = parse_json(&read_text(path)?, &origin)?;
        value.remove("subcommand");
        let text = serde_json::Value::Object(value).to_string();
        let mut opts: Options = parse_json(&text, &origin)?;
        if let Some(dir) = path.parent() {
            opts.rebase_paths(dir);
        }
        Ok(opts)
    }

    fn rebase_paths(&mut self, dir: &Path) {
        for p in self.paths_mut() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    fn paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [
            &mut self.out,
            &mut self.tensor,
            &mut self.context,
            &mut self.scores,
            &mut self.gold,
            &mut self.patterns,
            &mut self.joint,
        ]
        .into_iter()
        .flatten()
    }
}

pub fn required<'a, T>(value: &'a Option<T>, flag: &str) -> CliResult<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Validation(format!("--{flag} is required")))
}

/// Settings of one run, as echoed into its output directory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    #[serde(flatten)]
    pub options: Options,
}

impl RunConfig {
    /// Validates option values and makes every path absolute, so the echoed
    /// config can be reused from any directory.
    pub fn new(subcommand: &'static str, mut options: Options) -> CliResult<Self> {
        if let Some(a) = options.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(CliError::Validation(format!("--alpha {a} is outside [0, 1]")));
            }
        }
        if let Some(ks) = &options.ks {
            if ks.is_empty() || ks.contains(&0) {
                return Err(CliError::Validation("--k needs positive cutoffs".into()));
            }
        }
        if let Some(out) = &options.out {
            if out.as_os_str().is_empty() {
                return Err(CliError::Validation("--out is empty".into()));
            }
        }
        for p in options.paths_mut() {
            *p = std::path::absolute(&*p).map_err(|e| CliError::io(&*p, e))?;
        }
        Ok(Self { subcommand, options })
    }

    pub fn to_json(&self) -> Vec<u8> {
        crate::formats::to_json_pretty(self)
    }
}
