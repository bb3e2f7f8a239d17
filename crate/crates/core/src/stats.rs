//! Corpus statistics: language counts, token-length and score
//! distributions, histograms, and their JSON/TSV export.
//!
//! Quantiles use linear interpolation between order statistics: for sorted
//! values `x[0..n)` and fraction `p`, with `h = (n - 1) p`,
//! `q(p) = x[⌊h⌋] + (h - ⌊h⌋) (x[⌊h⌋ + 1] - x[⌊h⌋])`.
//!
//! Token lengths count whitespace tokens of the cleaned text without the
//! modelling length cap.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{clean_text, token_count, Corpus, Language};
use crate::error::{Error, Result};

pub const PERCENTILES: [u32; 5] = [5, 25, 50, 75, 95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Percentile → value for the percentiles in [`PERCENTILES`].
    pub quantiles: BTreeMap<u32, f64>,
    pub min: f64,
    pub max: f64,
}

impl DistributionSummary {
    /// `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let quantiles = PERCENTILES
            .iter()
            .map(|&p| (p, quantile_sorted(&sorted, f64::from(p) / 100.0)))
            .collect();
        Some(DistributionSummary {
            n,
            mean,
            std: var.sqrt(),
            quantiles,
            min: sorted[0],
            max: sorted[n - 1],
        })
    }

    pub fn quantile(&self, percentile: u32) -> Option<f64> {
        self.quantiles.get(&percentile).copied()
    }
}

/// Interpolated quantile of an ascending, non-empty slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Observations outside `[edges[0], edges[last]]`, including NaN.
    pub out_of_range: usize,
}

impl HistogramSpec {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Counts values per bin `[edges[i], edges[i+1])`; the last bin also takes
/// values equal to the final edge.
pub fn histogram(values: &[f64], edges: &[f64]) -> Result<HistogramSpec> {
    if edges.len() < 2
        || edges
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidParameter(
            "histogram edges must be at least two strictly increasing values".into(),
        ));
    }
    let last = edges.len() - 1;
    let mut counts = vec![0; last];
    let mut out_of_range = 0;
    for &v in values {
        if !(v >= edges[0] && v <= edges[last]) {
            out_of_range += 1;
            continue;
        }
        let bin = edges
            .partition_point(|&e| e <= v)
            .saturating_sub(1)
            .min(last - 1);
        counts[bin] += 1;
    }
    Ok(HistogramSpec {
        edges: edges.to_vec(),
        counts,
        out_of_range,
    })
}

/// Half-unit bins over [1, 5].
pub fn default_score_edges() -> Vec<f64> {
    (0..=8).map(|i| 1.0 + 0.5 * f64::from(i)).collect()
}

/// Unit bins over [0, 50].
pub fn default_length_edges() -> Vec<f64> {
    (0..=50).map(f64::from).collect()
}

pub fn language_distribution(corpus: &Corpus) -> BTreeMap<Language, usize> {
    let mut counts = BTreeMap::new();
    for t in corpus {
        *counts.entry(t.language).or_insert(0) += 1;
    }
    counts
}

/// Overall summary plus, when requested, one summary per language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedSummary {
    pub overall: DistributionSummary,
    pub per_language: BTreeMap<Language, DistributionSummary>,
}

fn grouped(values: &[(Language, f64)], group_by_language: bool) -> Option<GroupedSummary> {
    let all: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    let overall = DistributionSummary::from_values(&all)?;
    let mut per_language = BTreeMap::new();
    if group_by_language {
        let mut buckets: BTreeMap<Language, Vec<f64>> = BTreeMap::new();
        for (l, v) in values {
            buckets.entry(*l).or_default().push(*v);
        }
        for (l, vs) in buckets {
            per_language.insert(
                l,
                DistributionSummary::from_values(&vs).expect("non-empty bucket"),
            );
        }
    }
    Some(GroupedSummary {
        overall,
        per_language,
    })
}

fn lengths(corpus: &Corpus) -> Vec<(Language, f64)> {
    corpus
        .iter()
        .map(|t| (t.language, token_count(&clean_text(&t.text)) as f64))
        .collect()
}

fn scores(corpus: &Corpus) -> Result<Vec<(Language, f64)>> {
    corpus
        .iter()
        .map(|t| Ok((t.language, t.require_score()?)))
        .collect()
}

/// Token-length summary; `None` for an empty corpus.
pub fn length_stats(corpus: &Corpus, group_by_language: bool) -> Option<GroupedSummary> {
    grouped(&lengths(corpus), group_by_language)
}

/// Score summary; errors on the first unscored tweet, `None` when empty.
pub fn score_stats(corpus: &Corpus, group_by_language: bool) -> Result<Option<GroupedSummary>> {
    Ok(grouped(&scores(corpus)?, group_by_language))
}

/// Statistics for one group of tweets (the whole corpus or one language).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub count: usize,
    pub length: DistributionSummary,
    pub length_histogram: HistogramSpec,
    pub score: Option<DistributionSummary>,
    pub score_histogram: Option<HistogramSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub split: String,
    pub overall: GroupStats,
    pub per_language: BTreeMap<Language, GroupStats>,
}

fn group_stats(items: &[(Language, f64, Option<f64>)], with_scores: bool) -> Result<GroupStats> {
    let lens: Vec<f64> = items.iter().map(|i| i.1).collect();
    let length = DistributionSummary::from_values(&lens).expect("non-empty group");
    let length_histogram = histogram(&lens, &default_length_edges())?;
    let (score, score_histogram) = if with_scores {
        let ss: Vec<f64> = items.iter().filter_map(|i| i.2).collect();
        (
            DistributionSummary::from_values(&ss),
            Some(histogram(&ss, &default_score_edges())?),
        )
    } else {
        (None, None)
    };
    Ok(GroupStats {
        count: items.len(),
        length,
        length_histogram,
        score,
        score_histogram,
    })
}

/// Full report over a corpus. Score statistics are included only when
/// every tweet is scored.
pub fn corpus_report(corpus: &Corpus, split: &str) -> Result<StatsReport> {
    if corpus.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot summarise an empty corpus".into(),
        ));
    }
    let with_scores = corpus.iter().all(|t| t.score.is_some());
    let items: Vec<(Language, f64, Option<f64>)> = lengths(corpus)
        .into_iter()
        .zip(corpus.iter())
        .map(|((l, len), t)| (l, len, t.score))
        .collect();
    let overall = group_stats(&items, with_scores)?;
    let mut per_language = BTreeMap::new();
    for lang in language_distribution(corpus).into_keys() {
        let subset: Vec<_> = items.iter().filter(|i| i.0 == lang).copied().collect();
        per_language.insert(lang, group_stats(&subset, with_scores)?);
    }
    Ok(StatsReport {
        split: split.to_string(),
        overall,
        per_language,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsFormat {
    Json,
    Tsv,
}

impl StatsFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => StatsFormat::Tsv,
            _ => StatsFormat::Json,
        }
    }
}

pub fn export_stats(
    report: &StatsReport,
    path: impl AsRef<Path>,
    format: StatsFormat,
) -> Result<()> {
    let path = path.as_ref();
    let body = match format {
        StatsFormat::Json => serde_json::to_string_pretty(report)? + "\n",
        StatsFormat::Tsv => to_tsv(report),
    };
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn read_stats(path: impl AsRef<Path>, format: StatsFormat) -> Result<StatsReport> {
    let path = path.as_ref();
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        StatsFormat::Json => Ok(serde_json::from_str(&body)?),
        StatsFormat::Tsv => from_tsv(&body).map_err(|m| Error::format(path, m)),
    }
}

// TSV layout: header `group\tstatistic\tvalue`, then one row per scalar.
// Statistic names: `split`, `count`, `{length,score}.{n,mean,std,min,max,q5,...}`,
// `{length,score}_hist.{edge.i,count.i,out_of_range}`.

fn push_summary(out: &mut Vec<(String, String)>, prefix: &str, s: &DistributionSummary) {
    out.push((format!("{prefix}.n"), s.n.to_string()));
    out.push((format!("{prefix}.mean"), s.mean.to_string()));
    out.push((format!("{prefix}.std"), s.std.to_string()));
    out.push((format!("{prefix}.min"), s.min.to_string()));
    out.push((format!("{prefix}.max"), s.max.to_string()));
    for (p, v) in &s.quantiles {
        out.push((format!("{prefix}.q{p}"), v.to_string()));
    }
}

fn push_hist(out: &mut Vec<(String, String)>, prefix: &str, h: &HistogramSpec) {
    for (i, e) in h.edges.iter().enumerate() {
        out.push((format!("{prefix}.edge.{i}"), e.to_string()));
    }
    for (i, c) in h.counts.iter().enumerate() {
        out.push((format!("{prefix}.count.{i}"), c.to_string()));
    }
    out.push((format!("{prefix}.out_of_range"), h.out_of_range.to_string()));
}

fn group_rows(g: &GroupStats) -> Vec<(String, String)> {
    let mut rows = vec![("count".to_string(), g.count.to_string())];
    push_summary(&mut rows, "length", &g.length);
    push_hist(&mut rows, "length_hist", &g.length_histogram);
    if let Some(s) = &g.score {
        push_summary(&mut rows, "score", s);
    }
    if let Some(h) = &g.score_histogram {
        push_hist(&mut rows, "score_hist", h);
    }
    rows
}

fn to_tsv(report: &StatsReport) -> String {
    let mut out = String::from("group\tstatistic\tvalue\n");
    let _ = writeln!(out, "overall\tsplit\t{}", report.split);
    let groups = std::iter::once(("overall".to_string(), &report.overall)).chain(
        report
            .per_language
            .iter()
            .map(|(l, g)| (l.name().to_string(), g)),
    );
    for (name, g) in groups {
        for (stat, value) in group_rows(g) {
            let _ = writeln!(out, "{name}\t{stat}\t{value}");
        }
    }
    out
}

#[derive(Default)]
struct RawSummary(BTreeMap<String, String>);

impl RawSummary {
    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T, String> {
        let raw = self
            .0
            .get(key)
            .ok_or_else(|| format!("missing statistic `{key}`"))?;
        raw.parse()
            .map_err(|_| format!("bad value `{raw}` for `{key}`"))
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.0.keys().any(|k| k.starts_with(prefix))
    }

    fn summary(&self, prefix: &str) -> Result<DistributionSummary, String> {
        let mut quantiles = BTreeMap::new();
        for p in PERCENTILES {
            quantiles.insert(p, self.num(&format!("{prefix}.q{p}"))?);
        }
        Ok(DistributionSummary {
            n: self.num(&format!("{prefix}.n"))?,
            mean: self.num(&format!("{prefix}.mean"))?,
            std: self.num(&format!("{prefix}.std"))?,
            quantiles,
            min: self.num(&format!("{prefix}.min"))?,
            max: self.num(&format!("{prefix}.max"))?,
        })
    }

    fn indexed<T: std::str::FromStr>(&self, prefix: &str) -> Result<Vec<T>, String> {
        let mut out = Vec::new();
        while let Some(raw) = self.0.get(&format!("{prefix}.{}", out.len())) {
            out.push(
                raw.parse()
                    .map_err(|_| format!("bad value `{raw}` under `{prefix}`"))?,
            );
        }
        Ok(out)
    }

    fn hist(&self, prefix: &str) -> Result<HistogramSpec, String> {
        let edges: Vec<f64> = self.indexed(&format!("{prefix}.edge"))?;
        let counts: Vec<usize> = self.indexed(&format!("{prefix}.count"))?;
        if edges.len() != counts.len() + 1 {
            return Err(format!(
                "{prefix}: {} edges for {} counts",
                edges.len(),
                counts.len()
            ));
        }
        Ok(HistogramSpec {
            edges,
            counts,
            out_of_range: self.num(&format!("{prefix}.out_of_range"))?,
        })
    }

    fn group(&self) -> Result<GroupStats, String> {
        Ok(GroupStats {
            count: self.num("count")?,
            length: self.summary("length")?,
            length_histogram: self.hist("length_hist")?,
            score: if self.has_prefix("score.") {
                Some(self.summary("score")?)
            } else {
                None
            },
            score_histogram: if self.has_prefix("score_hist.") {
                Some(self.hist("score_hist")?)
            } else {
                None
            },
        })
    }
}

fn from_tsv(body: &str) -> Result<StatsReport, String> {
    let mut lines = body.lines();
    if lines.next() != Some("group\tstatistic\tvalue") {
        return Err("missing `group\\tstatistic\\tvalue` header".into());
    }
    let mut split = None;
    let mut overall = RawSummary::default();
    let mut per_language: BTreeMap<Language, RawSummary> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.splitn(3, '\t').collect();
        let [group, stat, value] = fields[..] else {
            return Err(format!("line {}: expected 3 fields", i + 2));
        };
        if group == "overall" && stat == "split" {
            split = Some(value.to_string());
            continue;
        }
        let target = if group == "overall" {
            &mut overall
        } else {
            let lang: Language = group
                .parse()
                .map_err(|e: crate::corpus::UnknownLanguage| e.to_string())?;
            per_language.entry(lang).or_default()
        };
        target.0.insert(stat.to_string(), value.to_string());
    }
    Ok(StatsReport {
        split: split.ok_or("missing split row")?,
        overall: overall.group()?,
        per_language: per_language
            .into_iter()
            .map(|(l, raw)| Ok((l, raw.group()?)))
            .collect::<Result<_, String>>()?,
    })
}
