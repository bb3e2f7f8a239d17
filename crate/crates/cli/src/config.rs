//! Experiment configuration: a TOML file with a top-level `seed` and the
//! sections `[paths]`, `[split]`, `[augment]`, `[baseline]` and
//! `[evaluate]`. Every key is optional; see `experiment.example.toml` at
//! the repository root for the full schema with defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use intimacy_core::augment::{AugmentConfig, AugmentOp};
use intimacy_core::baseline::{FeatureHasher, GdParams, Optimizer};
use intimacy_core::corpus::{SplitSpec, StratifyBy};
use intimacy_core::seed::module_seed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const OUTPUT_DIR_ENV: &str = "INTIMACY_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub paths: Paths,
    pub split: SplitSection,
    pub augment: AugmentSection,
    pub baseline: BaselineSection,
    pub evaluate: EvaluateSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            paths: Paths::default(),
            split: SplitSection::default(),
            augment: AugmentSection::default(),
            baseline: BaselineSection::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub train: Option<PathBuf>,
    /// Labelled final test corpus, scored in addition to the held-out part
    /// of the training split.
    pub test: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// Directory of per-language `<lang>.txt` stopword files.
    pub stopwords: Option<PathBuf>,
    /// Competition reference values for the per-language tables.
    pub references: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            train: None,
            test: None,
            lexicon: None,
            stopwords: None,
            references: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub ratios: [f64; 3],
    pub stratify_by: StratifyBy,
    pub score_bins: Vec<f64>,
}

impl Default for SplitSection {
    fn default() -> Self {
        let spec = SplitSpec::default();
        SplitSection {
            ratios: spec.ratios,
            stratify_by: spec.stratify_by,
            score_bins: spec.score_bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub alpha_sr: f64,
    pub alpha_ri: f64,
    pub alpha_rs: f64,
    pub p_rd: f64,
    pub n_aug: usize,
    pub enabled_ops: Vec<AugmentOp>,
}

impl Default for AugmentSection {
    fn default() -> Self {
        let d = AugmentConfig::default();
        AugmentSection {
            alpha_sr: d.alpha_sr,
            alpha_ri: d.alpha_ri,
            alpha_rs: d.alpha_rs,
            p_rd: d.p_rd,
            n_aug: d.n_aug,
            enabled_ops: d.enabled_ops,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub ngram_orders: Vec<usize>,
    pub dim: usize,
    /// Candidate regularisation strengths; the one with the best
    /// validation Pearson is kept.
    pub lambdas: Vec<f64>,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub epochs: usize,
    pub tol: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        let h = FeatureHasher::default();
        let gd = GdParams::default();
        BaselineSection {
            ngram_orders: h.ngram_orders,
            dim: h.dim,
            lambdas: vec![1e-3, 1e-2, 1e-1],
            optimizer: Optimizer::GradientDescent,
            learning_rate: gd.learning_rate,
            epochs: gd.epochs,
            tol: gd.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub selection_metric: String,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            selection_metric: "pearson".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("reading config {}: {e}", path.display())))?;
        toml::from_str(&body).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }

    /// Loads `path` if given, otherwise starts from defaults, then applies
    /// the output-directory environment override.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                config.paths.output_dir = PathBuf::from(dir);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.evaluate.selection_metric != "pearson" {
            bail!(ConfigError(format!(
                "evaluate.selection_metric must be `pearson`, got `{}`",
                self.evaluate.selection_metric
            )));
        }
        for (key, path) in [
            ("paths.train", &self.paths.train),
            ("paths.test", &self.paths.test),
            ("paths.lexicon", &self.paths.lexicon),
            ("paths.stopwords", &self.paths.stopwords),
            ("paths.references", &self.paths.references),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    bail!(ConfigError(format!(
                        "{key}: {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        self.split_spec()
            .validate()
            .map_err(|e| ConfigError(format!("[split] {e}")))?;
        self.augment_config()
            .validate()
            .map_err(|e| ConfigError(format!("[augment] {e}")))?;
        self.hasher()
            .validate()
            .map_err(|e| ConfigError(format!("[baseline] {e}")))?;
        if self.baseline.lambdas.is_empty()
            || self
                .baseline
                .lambdas
                .iter()
                .any(|l| !l.is_finite() || *l < 0.0)
        {
            bail!(ConfigError(
                "baseline.lambdas must be a non-empty list of non-negative values".into()
            ));
        }
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            ratios: self.split.ratios,
            seed: module_seed(self.seed, "split"),
            stratify_by: self.split.stratify_by,
            score_bins: self.split.score_bins.clone(),
        }
    }

    pub fn augment_config(&self) -> AugmentConfig {
        let a = &self.augment;
        AugmentConfig {
            alpha_sr: a.alpha_sr,
            alpha_ri: a.alpha_ri,
            alpha_rs: a.alpha_rs,
            p_rd: a.p_rd,
            n_aug: a.n_aug,
            seed: module_seed(self.seed, "augment"),
            enabled_ops: a.enabled_ops.clone(),
        }
    }

    pub fn hasher(&self) -> FeatureHasher {
        FeatureHasher {
            ngram_orders: self.baseline.ngram_orders.clone(),
            dim: self.baseline.dim,
            hash_seed: module_seed(self.seed, "hash"),
        }
    }

    pub fn gd_params(&self) -> GdParams {
        GdParams {
            learning_rate: self.baseline.learning_rate,
            epochs: self.baseline.epochs,
            tol: self.baseline.tol,
        }
    }

    /// Copy with the output directory blanked: where results are written
    /// does not change what they contain.
    pub fn without_output_dir(&self) -> Self {
        let mut c = self.clone();
        c.paths.output_dir = PathBuf::new();
        c
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration,
    /// output directory excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&self.without_output_dir()).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }
}
