//! Data pipeline and evaluation tooling for multilingual tweet intimacy
//! regression.
//!
//! The crate covers everything around model fine-tuning: loading and
//! cleaning the tweet corpus, stratified splitting, EDA-style augmentation,
//! corpus statistics, the regression metric suite, a hashed character
//! n-gram ridge baseline and per-language scoring of prediction files.

pub mod augment;
pub mod baseline;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod report;
pub mod seed;
pub mod stats;
pub mod synth;

pub use corpus::{Corpus, Language, Tweet};
pub use error::{Error, Result};
pub use metrics::{MetricsReport, PairedSeries};
