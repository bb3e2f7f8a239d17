//! Regression metrics over aligned gold/prediction pairs: Pearson's r,
//! MSE, RMSE, MAE, SMAPE and R².
//!
//! Sums are two-pass: means first, then centered sums of squares and
//! products.
//!
//! SMAPE uses the symmetric-mean denominator and percent scaling,
//!
//! ```text
//! SMAPE = 100/n * Σ |g - p| / ((|g| + |p|) / 2)      ∈ [0, 200]
//! ```
//!
//! and R² is a fraction, `1 - Σ(g - p)² / Σ(g - ḡ)²`, negative when the
//! predictions are worse than the gold mean.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("series lengths differ: {gold} gold vs {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("empty series")]
    Empty,
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("pearson correlation is undefined: {0} values have zero variance")]
    UndefinedCorrelation(&'static str),
    #[error("r2 is undefined: gold values have zero variance")]
    ConstantGold,
    #[error("smape is undefined: gold and prediction are both zero at position {0}")]
    ZeroPair(usize),
}

/// Equal-length, non-empty, finite gold and prediction vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    gold: Vec<f64>,
    pred: Vec<f64>,
}

impl PairedSeries {
    pub fn new(gold: Vec<f64>, pred: Vec<f64>) -> Result<Self, MetricsError> {
        if gold.len() != pred.len() {
            return Err(MetricsError::LengthMismatch {
                gold: gold.len(),
                pred: pred.len(),
            });
        }
        if gold.is_empty() {
            return Err(MetricsError::Empty);
        }
        if let Some(i) = gold
            .iter()
            .zip(&pred)
            .position(|(g, p)| !g.is_finite() || !p.is_finite())
        {
            return Err(MetricsError::NonFinite(i));
        }
        Ok(PairedSeries { gold, pred })
    }

    pub fn gold(&self) -> &[f64] {
        &self.gold
    }

    pub fn pred(&self) -> &[f64] {
        &self.pred
    }

    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gold.iter().copied().zip(self.pred.iter().copied())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == xs[0])
}

/// Sample Pearson correlation, clamped to [-1, 1].
pub fn pearson(series: &PairedSeries) -> Result<f64, MetricsError> {
    if is_constant(&series.gold) {
        return Err(MetricsError::UndefinedCorrelation("gold"));
    }
    if is_constant(&series.pred) {
        return Err(MetricsError::UndefinedCorrelation("predicted"));
    }
    let mg = mean(&series.gold);
    let mp = mean(&series.pred);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (g, p) in series.pairs() {
        let dg = g - mg;
        let dp = p - mp;
        sxy += dg * dp;
        sxx += dg * dg;
        syy += dp * dp;
    }
    let denom = (sxx * syy).sqrt();
    if denom == 0.0 {
        return Err(MetricsError::UndefinedCorrelation("gold or predicted"));
    }
    Ok((sxy / denom).clamp(-1.0, 1.0))
}

pub fn mse(series: &PairedSeries) -> f64 {
    series.pairs().map(|(g, p)| (g - p) * (g - p)).sum::<f64>() / series.len() as f64
}

pub fn rmse(series: &PairedSeries) -> f64 {
    rmse_from_mse(mse(series))
}

/// RMSE implied by a reported MSE.
pub fn rmse_from_mse(mse: f64) -> f64 {
    mse.sqrt()
}

pub fn mae(series: &PairedSeries) -> f64 {
    series.pairs().map(|(g, p)| (g - p).abs()).sum::<f64>() / series.len() as f64
}

/// Symmetric mean absolute percentage error, in percent.
pub fn smape(series: &PairedSeries) -> Result<f64, MetricsError> {
    let mut total = 0.0;
    for (i, (g, p)) in series.pairs().enumerate() {
        let denom = (g.abs() + p.abs()) / 2.0;
        if denom == 0.0 {
            return Err(MetricsError::ZeroPair(i));
        }
        total += (g - p).abs() / denom;
    }
    Ok(100.0 * total / series.len() as f64)
}

pub fn r2(series: &PairedSeries) -> Result<f64, MetricsError> {
    if is_constant(&series.gold) {
        return Err(MetricsError::ConstantGold);
    }
    let mg = mean(&series.gold);
    let ss_tot: f64 = series.gold.iter().map(|g| (g - mg) * (g - mg)).sum();
    let ss_res: f64 = series.pairs().map(|(g, p)| (g - p) * (g - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// All six metrics over one series. Undefined metrics are `None`; the
/// reason is available from the corresponding function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pearson: Option<f64>,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub smape: Option<f64>,
    pub r2: Option<f64>,
    pub n: usize,
}

/// Computes every metric; failures of one metric do not hide the others
/// and are returned alongside the report.
pub fn full_report(series: &PairedSeries) -> (MetricsReport, Vec<MetricsError>) {
    let mut errors = Vec::new();
    let mut keep = |r: Result<f64, MetricsError>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(e);
            None
        }
    };
    let pearson = keep(pearson(series));
    let smape = keep(smape(series));
    let r2 = keep(r2(series));
    let mse = mse(series);
    let report = MetricsReport {
        pearson,
        mse,
        rmse: mse.sqrt(),
        mae: mae(series),
        smape,
        r2,
        n: series.len(),
    };
    (report, errors)
}
