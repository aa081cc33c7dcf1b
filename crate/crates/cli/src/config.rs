//! Run configuration: one JSON document, unknown keys rejected, validated
//! before anything is computed.

use std::path::{Path, PathBuf};

use graphset::classifier::EvalParams;
use graphset::embedding::{EmbeddingConfig, EmbeddingMethod};
use graphset::features::{FeatureRegistry, FeatureSpec};
use graphset::sampling::SweepConfig;
use graphset::selection::{SelectionParams, UnsupervisedParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    Tud,
    EdgeList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub format: DatasetFormat,
    /// TUD file prefix; defaults to the last path component.
    #[serde(default)]
    pub name: Option<String>,
    /// Edge-list collections only: one label per line, in graph order.
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Preprocessing {
    pub largest_component: bool,
    pub k_core: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "embed")]
    Embed,
    #[serde(rename = "classify")]
    Classify,
    #[serde(rename = "regress")]
    Regress,
    #[serde(rename = "select:greedy")]
    SelectGreedy,
    #[serde(rename = "select:fast")]
    SelectFast,
    #[serde(rename = "select:unsupervised")]
    SelectUnsupervised,
    #[serde(rename = "select:random")]
    SelectRandom,
    #[serde(rename = "select:worst")]
    SelectWorst,
    #[serde(rename = "similarity-sweep")]
    SimilaritySweep,
}

impl Task {
    pub fn is_selection(self) -> bool {
        matches!(
            self,
            Task::SelectGreedy | Task::SelectFast | Task::SelectUnsupervised | Task::SelectRandom | Task::SelectWorst
        )
    }

    pub fn needs_labels(self) -> bool {
        !matches!(self, Task::Embed | Task::SelectUnsupervised | Task::SimilaritySweep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub final_reembed: bool,
    pub final_reference_size: Option<usize>,
    pub unsupervised: UnsupervisedParams,
    /// Outer repetitions of the random baseline.
    pub n_outer: usize,
    /// Treat every feature column as its own candidate.
    pub per_column: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            final_reembed: true,
            final_reference_size: None,
            unsupervised: UnsupervisedParams::default(),
            n_outer: 500,
            per_column: false,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub preprocessing: Preprocessing,
    pub features: Vec<FeatureSpec>,
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default)]
    pub reduce_dim: Option<usize>,
    /// `embedding.seed` is replaced by the top-level `seed`.
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub eval: EvalParams,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Also write features.csv for commands other than `features`.
    #[serde(default)]
    pub write_features: bool,
}

/// Configuration problems; reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if config.dataset.path.is_relative() {
            if let Some(dir) = path.parent() {
                config.dataset.path = dir.join(&config.dataset.path);
            }
        }
        if let Some(labels) = &config.dataset.labels {
            if labels.is_relative() {
                if let Some(dir) = path.parent() {
                    config.dataset.labels = Some(dir.join(labels));
                }
            }
        }
        Ok(config)
    }

    /// Width of the node vectors that reach the embedding.
    pub fn feature_width(&self) -> usize {
        self.reduce_dim
            .unwrap_or_else(|| self.features.iter().map(|f| f.length).sum())
    }

    pub fn selection_params(&self) -> SelectionParams {
        SelectionParams {
            eval: self.eval.clone(),
            seed: self.seed,
            final_reembed: self.selection.final_reembed,
            final_reference_size: self.selection.final_reference_size,
        }
    }

    /// Checks that need no data. Dataset-dependent limits (for example
    /// `d <= m` for LOT) are checked by the library once the data is loaded.
    pub fn validate(&self, task: Task, registry: &FeatureRegistry) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        if self.features.is_empty() {
            return err("at least one feature is required".into());
        }
        for f in &self.features {
            f.validate(registry).map_err(|e| ConfigError(e.to_string()))?;
        }
        let mut names: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return err("feature names must be unique".into());
        }
        let total: usize = self.features.iter().map(|f| f.length).sum();
        if let Some(d) = self.reduce_dim {
            if d == 0 || d > total {
                return err(format!("reduce_dim {d} must lie in 1..={total}"));
            }
        }
        let e = &self.embedding;
        if e.dim == 0 {
            return err("embedding.dim must be at least 1".into());
        }
        if e.method == EmbeddingMethod::Approximate && e.dim > self.feature_width() {
            return err(format!(
                "approximate embedding dim {} exceeds the feature width {}",
                e.dim,
                self.feature_width()
            ));
        }
        if e.reference_size == Some(0) {
            return err("embedding.reference_size must be at least 1".into());
        }
        if let Some(eps) = e.sinkhorn_epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return err(format!("sinkhorn_epsilon {eps} must be positive"));
            }
        }
        if let Some(0) = self.preprocessing.k_core {
            return err("k_core must be at least 1".into());
        }
        if task.needs_labels() || task == Task::SimilaritySweep {
            self.eval.validate().map_err(|e| ConfigError(e.to_string()))?;
        }
        if task.is_selection() && !self.selection.per_column && self.features.len() < 2 {
            return err("selection needs at least 2 candidate features".into());
        }
        if task == Task::SelectRandom && self.selection.n_outer == 0 {
            return err("selection.n_outer must be at least 1".into());
        }
        if task == Task::SelectUnsupervised && self.selection.unsupervised.nodes_per_graph == 0 {
            return err("selection.unsupervised.nodes_per_graph must be at least 1".into());
        }
        if task == Task::SimilaritySweep {
            self.sweep.validate().map_err(|e| ConfigError(e.to_string()))?;
        }
        Ok(())
    }

    /// SHA-256 of the configuration with the output directory blanked, so
    /// moving outputs does not change the hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }
}
