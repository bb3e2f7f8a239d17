//! Ridge regression over hashed character n-grams.
//!
//! Features: the cleaned text is lowercased, every character n-gram of the
//! configured orders is hashed into `dim` buckets and counted, and the
//! count vector is L2-normalised.
//!
//! Hash: 64-bit FNV-1a over the n-gram's UTF-8 bytes, starting from the
//! FNV offset basis XOR `splitmix64(hash_seed)`, then passed through
//! SplitMix64's finalizer; the bucket is the low `log2(dim)` bits.
//!
//! Objective, with an unpenalised bias:
//!
//! ```text
//! J(w, b) = (1/n) Σ (w·x_i + b - y_i)² + λ ‖w‖²
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{clean_text, Corpus, MAX_SCORE, MIN_SCORE};
use crate::error::{Error, Result};
use crate::seed::{splitmix64, FNV_OFFSET, FNV_PRIME};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureHasher {
    pub ngram_orders: Vec<usize>,
    pub dim: usize,
    pub hash_seed: u64,
}

impl Default for FeatureHasher {
    fn default() -> Self {
        FeatureHasher {
            ngram_orders: vec![2, 3, 4],
            dim: 1 << 18,
            hash_seed: 0,
        }
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    pub entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FeatureHasher {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 || !self.dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "hash dimension must be a power of two >= 2, got {}",
                self.dim
            )));
        }
        if self.ngram_orders.is_empty() || self.ngram_orders.contains(&0) {
            return Err(Error::InvalidParameter(
                "n-gram orders must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn bucket(&self, ngram: &str) -> usize {
        let start = FNV_OFFSET ^ splitmix64(self.hash_seed);
        let h = ngram
            .as_bytes()
            .iter()
            .fold(start, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME));
        (splitmix64(h) as usize) & (self.dim - 1)
    }

    /// Raw (unnormalised) bucket counts of `text`, which is used as given.
    pub fn counts(&self, text: &str) -> BTreeMap<usize, f64> {
        let lower = text.to_lowercase();
        let boundaries: Vec<usize> = lower
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(lower.len()))
            .collect();
        let chars = boundaries.len() - 1;
        let mut counts = BTreeMap::new();
        for &order in &self.ngram_orders {
            if order > chars {
                continue;
            }
            for start in 0..=chars - order {
                let gram = &lower[boundaries[start]..boundaries[start + order]];
                *counts.entry(self.bucket(gram)).or_insert(0.0) += 1.0;
            }
        }
        counts
    }

    /// L2-normalised hashed n-gram counts of already-cleaned text.
    pub fn featurize(&self, text: &str) -> SparseVec {
        let counts = self.counts(text);
        let norm = counts.values().map(|v| v * v).sum::<f64>().sqrt();
        SparseVec {
            entries: counts.into_iter().map(|(i, v)| (i, v / norm)).collect(),
        }
    }

    pub fn featurize_corpus(&self, corpus: &Corpus) -> Vec<SparseVec> {
        corpus
            .tweets()
            .par_iter()
            .map(|t| self.featurize(&clean_text(&t.text)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    ClosedForm,
    GradientDescent,
}

/// Full-batch gradient descent with step `learning_rate / sqrt(t)` at
/// epoch `t = 1, 2, ...`, stopping after `epochs` or once the objective
/// changes by less than `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub tol: f64,
}

impl Default for GdParams {
    fn default() -> Self {
        GdParams {
            learning_rate: 0.5,
            epochs: 500,
            tol: 1e-9,
        }
    }
}

/// A ridge problem over sparse rows: holds the data and evaluates the
/// objective and its gradient.
#[derive(Debug, Clone)]
pub struct RidgeProblem<'a> {
    pub rows: &'a [SparseVec],
    pub targets: &'a [f64],
    pub dim: usize,
    pub lambda: f64,
}

impl RidgeProblem<'_> {
    fn residuals(&self, weights: &[f64], bias: f64) -> Vec<f64> {
        self.rows
            .iter()
            .zip(self.targets)
            .map(|(x, y)| x.dot(weights) + bias - y)
            .collect()
    }

    pub fn objective(&self, weights: &[f64], bias: f64) -> f64 {
        let n = self.rows.len() as f64;
        let loss = self
            .residuals(weights, bias)
            .iter()
            .map(|r| r * r)
            .sum::<f64>()
            / n;
        loss + self.lambda * weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Gradient with respect to `(weights, bias)`.
    pub fn gradient(&self, weights: &[f64], bias: f64) -> (Vec<f64>, f64) {
        let n = self.rows.len() as f64;
        let mut grad: Vec<f64> = weights.iter().map(|w| 2.0 * self.lambda * w).collect();
        let mut grad_b = 0.0;
        for (x, r) in self.rows.iter().zip(self.residuals(weights, bias)) {
            let scale = 2.0 * r / n;
            grad_b += scale;
            for &(i, v) in &x.entries {
                grad[i] += scale * v;
            }
        }
        (grad, grad_b)
    }

    /// Exact minimiser. Works on the active (non-zero) dimensions only and
    /// solves whichever of the primal (`m×m`) or dual (`n×n`) centered
    /// systems is smaller with a Cholesky factorisation.
    pub fn solve_closed_form(&self) -> Result<(Vec<f64>, f64)> {
        let n = self.rows.len();
        let mut active: Vec<usize> = self
            .rows
            .iter()
            .flat_map(|x| x.entries.iter().map(|e| e.0))
            .collect();
        active.sort_unstable();
        active.dedup();
        let m = active.len();
        let y_mean = self.targets.iter().sum::<f64>() / n as f64;
        if m == 0 {
            return Ok((vec![0.0; self.dim], y_mean));
        }
        let col: HashMap<usize, usize> = active.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        // rows in active coordinates; entries stay sorted because `active` is
        let rows: Vec<Vec<(usize, f64)>> = self
            .rows
            .iter()
            .map(|x| x.entries.iter().map(|&(i, v)| (col[&i], v)).collect())
            .collect();
        let mut x_mean = DVector::<f64>::zeros(m);
        for row in &rows {
            for &(j, v) in row {
                x_mean[j] += v;
            }
        }
        x_mean /= n as f64;
        let yc: Vec<f64> = self.targets.iter().map(|y| y - y_mean).collect();
        let singular = || Error::Singular {
            lambda: self.lambda,
        };

        // stationarity: (Xcᵀ Xc + nλ I) w = Xcᵀ yc, with Xc = X - 1 x̄ᵀ
        // built from the sparse rows without materialising X
        let ridge = n as f64 * self.lambda;
        let w_active = if m <= n {
            let mut gram = DMatrix::<f64>::zeros(m, m);
            for row in &rows {
                for &(a, va) in row {
                    for &(b, vb) in row {
                        gram[(a, b)] += va * vb;
                    }
                }
            }
            gram.ger(-(n as f64), &x_mean, &x_mean, 1.0);
            for d in 0..m {
                gram[(d, d)] += ridge;
            }
            // Σ yc = 0, so Xcᵀ yc = Xᵀ yc
            let mut rhs = DVector::<f64>::zeros(m);
            for (row, y) in rows.iter().zip(&yc) {
                for &(j, v) in row {
                    rhs[j] += v * y;
                }
            }
            gram.cholesky().ok_or_else(singular)?.solve(&rhs)
        } else {
            let proj: Vec<f64> = rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| v * x_mean[j]).sum())
                .collect();
            let mean_sq = x_mean.norm_squared();
            let kernel_rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    (0..=i)
                        .map(|k| sparse_dot(&rows[i], &rows[k]) - proj[i] - proj[k] + mean_sq)
                        .collect()
                })
                .collect();
            let mut kernel = DMatrix::<f64>::zeros(n, n);
            for (i, kr) in kernel_rows.iter().enumerate() {
                for (k, &v) in kr.iter().enumerate() {
                    kernel[(i, k)] = v;
                    kernel[(k, i)] = v;
                }
            }
            for d in 0..n {
                kernel[(d, d)] += ridge;
            }
            let alpha = kernel
                .cholesky()
                .ok_or_else(singular)?
                .solve(&DVector::from_vec(yc));
            // w = Xcᵀ α = Xᵀ α - x̄ Σα
            let mut w = -x_mean.clone() * alpha.sum();
            for (row, a) in rows.iter().zip(alpha.iter()) {
                for &(j, v) in row {
                    w[j] += v * a;
                }
            }
            w
        };
        if w_active.iter().any(|w| !w.is_finite()) {
            return Err(singular());
        }

        let mut weights = vec![0.0; self.dim];
        for (j, &i) in active.iter().enumerate() {
            weights[i] = w_active[j];
        }
        let bias = y_mean
            - x_mean
                .iter()
                .zip(w_active.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        Ok((weights, bias))
    }

    pub fn solve_gradient_descent(&self, params: &GdParams) -> (Vec<f64>, f64) {
        let mut weights = vec![0.0; self.dim];
        // starting from the mean target removes the slowest direction
        let mut bias = self.targets.iter().sum::<f64>() / self.targets.len().max(1) as f64;
        let mut previous = self.objective(&weights, bias);
        for t in 1..=params.epochs {
            let step = params.learning_rate / (t as f64).sqrt();
            let (grad, grad_b) = self.gradient(&weights, bias);
            for (w, g) in weights.iter_mut().zip(&grad) {
                *w -= step * g;
            }
            bias -= step * grad_b;
            let current = self.objective(&weights, bias);
            if (previous - current).abs() < params.tol {
                log::debug!("gradient descent converged after {t} epochs");
                break;
            }
            previous = current;
        }
        (weights, bias)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub hasher: FeatureHasher,
    pub lambda: f64,
    pub bias: f64,
    pub weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: RidgeModel,
}

pub fn fit(
    train: &Corpus,
    hasher: &FeatureHasher,
    lambda: f64,
    optimizer: Optimizer,
    gd_params: &GdParams,
) -> Result<RidgeModel> {
    hasher.validate()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    if train.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot fit on an empty corpus".into(),
        ));
    }
    let targets = train.scores()?;
    let rows = hasher.featurize_corpus(train);
    let problem = RidgeProblem {
        rows: &rows,
        targets: &targets,
        dim: hasher.dim,
        lambda,
    };
    let (weights, bias) = match optimizer {
        Optimizer::ClosedForm => problem.solve_closed_form()?,
        Optimizer::GradientDescent => problem.solve_gradient_descent(gd_params),
    };
    Ok(RidgeModel {
        hasher: hasher.clone(),
        lambda,
        bias,
        weights,
    })
}

impl RidgeModel {
    pub fn raw_score(&self, features: &SparseVec) -> f64 {
        features.dot(&self.weights) + self.bias
    }

    pub fn predict_text(&self, text: &str) -> f64 {
        clip_score(self.raw_score(&self.hasher.featurize(&clean_text(text))))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        let json = serde_json::to_string(&file)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&body)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported model format {}", file.format_version),
            ));
        }
        let model = file.model;
        model
            .hasher
            .validate()
            .map_err(|e| Error::format(path, e.to_string()))?;
        if model.weights.len() != model.hasher.dim {
            return Err(Error::format(
                path,
                format!(
                    "{} weights for hash dimension {}",
                    model.weights.len(),
                    model.hasher.dim
                ),
            ));
        }
        if model.weights.iter().any(|w| !w.is_finite()) || !model.bias.is_finite() {
            return Err(Error::format(path, "non-finite model parameters"));
        }
        Ok(model)
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut k, mut sum) = (0, 0, 0.0);
    while i < a.len() && k < b.len() {
        match a[i].0.cmp(&b[k].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[k].1;
                i += 1;
                k += 1;
            }
        }
    }
    sum
}

pub fn clip_score(raw: f64) -> f64 {
    raw.clamp(MIN_SCORE, MAX_SCORE)
}

/// Clipped predictions, one per tweet in corpus order.
pub fn predict(model: &RidgeModel, corpus: &Corpus) -> Vec<f64> {
    model
        .hasher
        .featurize_corpus(corpus)
        .iter()
        .map(|x| clip_score(model.raw_score(x)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Language, SplitName, Tweet};

    fn small_hasher(dim: usize) -> FeatureHasher {
        FeatureHasher {
            ngram_orders: vec![2, 3],
            dim,
            hash_seed: 5,
        }
    }

    fn corpus(rows: &[(&str, f64)]) -> Corpus {
        let tweets = rows
            .iter()
            .enumerate()
            .map(|(i, (t, s))| Tweet::new(i as u64, *t, Language::English, Some(*s)).unwrap())
            .collect();
        Corpus::new(tweets, "mem", SplitName::Train).unwrap()
    }

    #[test]
    fn featurize_basics() {
        let h = FeatureHasher {
            ngram_orders: vec![2],
            ..Default::default()
        };
        assert!(h.featurize("").is_zero());
        assert!(h.featurize("a").is_zero());
        assert_eq!(h.counts("ab").len(), 1);
        let v = h.featurize("ab");
        assert_eq!(v.entries.len(), 1);
        assert!((v.entries[0].1 - 1.0).abs() < 1e-15);
        assert_eq!(h.featurize("hello world"), h.featurize("hello world"));
        assert!((h.featurize("hello world").norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn featurize_is_case_insensitive_and_unicode_safe() {
        let h = FeatureHasher::default();
        assert_eq!(h.featurize("Hello"), h.featurize("hello"));
        // 3 chars, orders 2..=4: two bigrams plus one trigram
        let total: f64 = h.counts("你好吗").values().sum();
        assert_eq!(total, 3.0);
    }

    #[test]
    fn hash_seed_changes_buckets() {
        let a = FeatureHasher {
            hash_seed: 1,
            ..Default::default()
        };
        let b = FeatureHasher {
            hash_seed: 2,
            ..Default::default()
        };
        let grams = ["ab", "cd", "ef", "gh", "ij"];
        assert!(grams.iter().any(|g| a.bucket(g) != b.bucket(g)));
    }

    #[test]
    fn hasher_validation() {
        assert!(FeatureHasher {
            dim: 1000,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(FeatureHasher {
            dim: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(FeatureHasher {
            ngram_orders: vec![0],
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn huge_lambda_shrinks_to_mean() {
        let c = corpus(&[("good day", 1.0), ("bad night", 3.0), ("fine morning", 5.0)]);
        let m = fit(
            &c,
            &small_hasher(64),
            1e9,
            Optimizer::ClosedForm,
            &GdParams::default(),
        )
        .unwrap();
        let norm = m.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "{norm}");
        assert!((m.bias - 3.0).abs() < 1e-6);
    }

    #[test]
    fn planted_linear_targets_are_fit_exactly() {
        // targets generated forward from a planted weight vector
        let h = small_hasher(256);
        let texts = ["alpha", "bravo", "charlie", "delta", "echo"];
        let planted: Vec<f64> = (0..256)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 10.0)
            .collect();
        let rows: Vec<(&str, f64)> = texts
            .iter()
            .map(|t| (*t, h.featurize(t).dot(&planted) + 3.0))
            .collect();
        assert!(rows.iter().all(|r| (1.0..=5.0).contains(&r.1)));
        let c = corpus(&rows);
        let m = fit(&c, &h, 1e-8, Optimizer::ClosedForm, &GdParams::default()).unwrap();
        let preds = predict(&m, &c);
        let train_mse = preds
            .iter()
            .zip(&rows)
            .map(|(p, r)| (p - r.1).powi(2))
            .sum::<f64>()
            / 5.0;
        assert!(train_mse < 1e-6, "{train_mse}");
    }

    #[test]
    fn closed_form_is_stationary() {
        let c = corpus(&[
            ("i love you", 4.5),
            ("see you at work", 1.5),
            ("miss you so much", 4.0),
            ("meeting at noon", 1.2),
            ("love this weather", 2.4),
            ("you are my world", 4.8),
        ]);
        let h = small_hasher(64);
        let rows = h.featurize_corpus(&c);
        let targets = c.scores().unwrap();
        let problem = RidgeProblem {
            rows: &rows,
            targets: &targets,
            dim: 64,
            lambda: 0.05,
        };
        let (w, b) = problem.solve_closed_form().unwrap();
        let (g, gb) = problem.gradient(&w, b);
        assert!(g.iter().all(|x| x.abs() <= 1e-6));
        assert!(gb.abs() <= 1e-6);
    }

    #[test]
    fn primal_and_dual_paths_are_both_stationary() {
        // 16 buckets for 80 rows takes the primal path, 4096 the dual one
        let c = crate::synth::planted_corpus(80, 3, 0.1);
        let targets = c.scores().unwrap();
        for dim in [16, 4096] {
            let h = small_hasher(dim);
            let rows = h.featurize_corpus(&c);
            let problem = RidgeProblem {
                rows: &rows,
                targets: &targets,
                dim,
                lambda: 0.01,
            };
            let (w, b) = problem.solve_closed_form().unwrap();
            let (g, gb) = problem.gradient(&w, b);
            let worst = g.iter().chain([&gb]).fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(worst <= 1e-9, "dim {dim}: {worst}");
        }
    }

    #[test]
    fn duplicate_rows_at_zero_lambda_are_singular() {
        let c = corpus(&[("same text", 1.0), ("same text", 2.0), ("same text", 3.0)]);
        let err = fit(
            &c,
            &small_hasher(64),
            0.0,
            Optimizer::ClosedForm,
            &GdParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
        assert!(err.to_string().contains("lambda > 0"));
    }

    #[test]
    fn prediction_clipping() {
        let c = corpus(&[("anything", 2.0), ("else", 3.0)]);
        let mut m = RidgeModel {
            hasher: small_hasher(64),
            lambda: 1.0,
            bias: 2.0,
            weights: vec![0.0; 64],
        };
        assert_eq!(predict(&m, &c), vec![2.0, 2.0]);
        m.bias = 7.3;
        assert_eq!(predict(&m, &c), vec![5.0, 5.0]);
        m.bias = -0.4;
        assert_eq!(predict(&m, &c), vec![1.0, 1.0]);
    }

    #[test]
    fn model_persistence() {
        let dir = tempfile::tempdir().unwrap();
        let c = corpus(&[("good day", 1.0), ("bad night", 3.0), ("fine morning", 5.0)]);
        let m = fit(
            &c,
            &small_hasher(64),
            0.1,
            Optimizer::ClosedForm,
            &GdParams::default(),
        )
        .unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        assert_eq!(RidgeModel::load(&p).unwrap(), m);

        let mut bad = m.clone();
        bad.weights.pop();
        bad.save(&p).unwrap();
        assert!(matches!(RidgeModel::load(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn fit_rejects_bad_input() {
        let h = small_hasher(64);
        let empty = Corpus::empty("x", SplitName::Train);
        assert!(fit(&empty, &h, 1.0, Optimizer::ClosedForm, &GdParams::default()).is_err());
        let c = corpus(&[("a b", 2.0)]);
        assert!(fit(&c, &h, -1.0, Optimizer::ClosedForm, &GdParams::default()).is_err());
    }
}
