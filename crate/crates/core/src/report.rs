//! Scoring prediction files against gold corpora and rendering result
//! tables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{check_score, Corpus, Language};
use crate::error::{Error, Result};
use crate::metrics::{self, MetricsReport, PairedSeries};
use crate::stats::{HistogramSpec, StatsReport};

/// Languages with fewer pairs than this are flagged unreliable.
pub const MIN_RELIABLE_PAIRS: usize = 3;

const MAX_LISTED_IDS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionsFile {
    pub rows: Vec<(u64, f64)>,
    pub model_tag: String,
    pub augmented: bool,
}

impl PredictionsFile {
    pub fn new(
        rows: Vec<(u64, f64)>,
        model_tag: impl Into<String>,
        augmented: bool,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for &(id, p) in &rows {
            if !seen.insert(id) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate prediction id {id}"
                )));
            }
            check_score(p)
                .map_err(|m| Error::InvalidParameter(format!("prediction for id {id}: {m}")))?;
        }
        Ok(PredictionsFile {
            rows,
            model_tag: model_tag.into(),
            augmented,
        })
    }

    /// Reads the tab-separated form:
    ///
    /// ```text
    /// # model_tag=ridge
    /// # augmented=true
    /// id    prediction
    /// 0     2.31
    /// ```
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut model_tag = String::new();
        let mut augmented = false;
        let mut header_seen = false;
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        let mut data_row = 0;
        for line in body.lines() {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.trim().split_once('=') {
                    match key.trim() {
                        "model_tag" => model_tag = value.trim().to_string(),
                        "augmented" => {
                            augmented = match value.trim() {
                                "true" | "yes" | "1" => true,
                                "false" | "no" | "0" => false,
                                other => {
                                    return Err(Error::format(
                                        path,
                                        format!("bad augmented flag `{other}`"),
                                    ))
                                }
                            }
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
                if cols != ["id", "prediction"] {
                    return Err(Error::format(path, "expected header `id\\tprediction`"));
                }
                header_seen = true;
                continue;
            }
            data_row += 1;
            let row_err = |field: &str, message: String| Error::Row {
                path: path.to_path_buf(),
                row: data_row,
                field: field.into(),
                message,
            };
            let (id, pred) = line
                .split_once('\t')
                .ok_or_else(|| row_err("line", "expected two tab-separated fields".into()))?;
            let id: u64 = id
                .trim()
                .parse()
                .map_err(|_| row_err("id", format!("bad id `{id}`")))?;
            let pred: f64 = pred
                .trim()
                .parse()
                .map_err(|_| row_err("prediction", format!("bad prediction `{pred}`")))?;
            check_score(pred).map_err(|m| row_err("prediction", m))?;
            if !seen.insert(id) {
                return Err(row_err("id", format!("duplicate id {id}")));
            }
            rows.push((id, pred));
        }
        if !header_seen {
            return Err(Error::format(path, "missing `id\\tprediction` header"));
        }
        Ok(PredictionsFile {
            rows,
            model_tag,
            augmented,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        let _ = writeln!(out, "# model_tag={}", self.model_tag);
        let _ = writeln!(out, "# augmented={}", self.augmented);
        out.push_str("id\tprediction\n");
        for (id, p) in &self.rows {
            let _ = writeln!(out, "{id}\t{p}");
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Optional competition reference values per language (top score and our
/// rank), shown next to computed scores.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct References {
    pub per_language: BTreeMap<Language, (Option<f64>, Option<u32>)>,
    pub overall: Option<(Option<f64>, Option<u32>)>,
}

impl References {
    /// TSV with header `language\ttop_pearson\trank`; `overall` is accepted
    /// as a language; empty cells mean "unknown".
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut refs = References::default();
        for (i, line) in body.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let row_err = |field: &str, message: String| Error::Row {
                path: path.to_path_buf(),
                row: i,
                field: field.into(),
                message,
            };
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            if f.len() != 3 {
                return Err(row_err("line", "expected 3 tab-separated fields".into()));
            }
            let top = match f[1] {
                "" => None,
                s => Some(
                    s.parse()
                        .map_err(|_| row_err("top_pearson", format!("bad value `{s}`")))?,
                ),
            };
            let rank = match f[2] {
                "" => None,
                s => Some(
                    s.parse()
                        .map_err(|_| row_err("rank", format!("bad value `{s}`")))?,
                ),
            };
            if f[0].eq_ignore_ascii_case("overall") {
                refs.overall = Some((top, rank));
            } else {
                let lang: Language =
                    f[0].parse().map_err(|e: crate::corpus::UnknownLanguage| {
                        row_err("language", e.to_string())
                    })?;
                refs.per_language.insert(lang, (top, rank));
            }
        }
        Ok(refs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerLanguageRow {
    pub language: Language,
    /// `None` when the correlation is undefined (constant gold or
    /// predictions within the language).
    pub pearson: Option<f64>,
    pub n: usize,
    pub reference_pearson: Option<f64>,
    pub reference_rank: Option<u32>,
    pub unreliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub model_tag: String,
    pub augmented: bool,
    pub overall: MetricsReport,
    pub per_language: Vec<PerLanguageRow>,
}

fn list_ids(ids: &[u64]) -> String {
    let shown: Vec<String> = ids
        .iter()
        .take(MAX_LISTED_IDS)
        .map(u64::to_string)
        .collect();
    let more = ids.len().saturating_sub(MAX_LISTED_IDS);
    if more > 0 {
        format!("{} (+{more} more)", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

/// Strict join of gold tweets and predictions: both id sets must be equal.
/// Returns the pairs in gold order.
pub fn align(gold: &Corpus, preds: &PredictionsFile) -> Result<Vec<(Language, f64, f64)>> {
    let by_id: HashMap<u64, f64> = preds.rows.iter().copied().collect();
    let gold_ids: HashSet<u64> = gold.iter().map(|t| t.id).collect();
    let mut missing: Vec<u64> = gold
        .iter()
        .map(|t| t.id)
        .filter(|id| !by_id.contains_key(id))
        .collect();
    let mut extra: Vec<u64> = preds
        .rows
        .iter()
        .map(|r| r.0)
        .filter(|id| !gold_ids.contains(id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        missing.sort_unstable();
        extra.sort_unstable();
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!(
                "{} gold id(s) without prediction: {}",
                missing.len(),
                list_ids(&missing)
            ));
        }
        if !extra.is_empty() {
            parts.push(format!(
                "{} predicted id(s) not in gold: {}",
                extra.len(),
                list_ids(&extra)
            ));
        }
        return Err(Error::IdMismatch(parts.join("; ")));
    }
    gold.iter()
        .map(|t| Ok((t.language, t.require_score()?, by_id[&t.id])))
        .collect()
}

pub fn evaluate_predictions(
    gold: &Corpus,
    preds: &PredictionsFile,
    refs: &References,
) -> Result<Evaluation> {
    let pairs = align(gold, preds)?;
    let series = PairedSeries::new(
        pairs.iter().map(|p| p.1).collect(),
        pairs.iter().map(|p| p.2).collect(),
    )?;
    let (overall, errors) = metrics::full_report(&series);
    for e in &errors {
        log::warn!("overall: {e}");
    }

    let mut groups: BTreeMap<Language, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (lang, g, p) in &pairs {
        let entry = groups.entry(*lang).or_default();
        entry.0.push(*g);
        entry.1.push(*p);
    }
    let per_language = groups
        .into_iter()
        .map(|(language, (g, p))| {
            let n = g.len();
            let pearson = PairedSeries::new(g, p)
                .ok()
                .and_then(|s| metrics::pearson(&s).ok());
            let (reference_pearson, reference_rank) = refs
                .per_language
                .get(&language)
                .copied()
                .unwrap_or_default();
            PerLanguageRow {
                language,
                pearson,
                n,
                reference_pearson,
                reference_rank,
                unreliable: n < MIN_RELIABLE_PAIRS,
            }
        })
        .collect();

    Ok(Evaluation {
        model_tag: preds.model_tag.clone(),
        augmented: preds.augmented,
        overall,
        per_language,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

/// Aligned text table with columns Language, Pearson, Top Pearson,
/// Ranking, n, followed by an Overall row.
pub fn render_language_table(eval: &Evaluation, refs: &References) -> String {
    let mut rows: Vec<[String; 5]> = vec![[
        "Language".into(),
        "Pearson".into(),
        "Top Pearson".into(),
        "Ranking".into(),
        "n".into(),
    ]];
    for r in &eval.per_language {
        let mut lang = r.language.name().to_string();
        if r.unreliable {
            lang.push('*');
        }
        rows.push([
            lang,
            fmt_opt(r.pearson),
            fmt_opt(r.reference_pearson),
            r.reference_rank
                .map_or_else(|| "-".into(), |x| x.to_string()),
            r.n.to_string(),
        ]);
    }
    let (top, rank) = refs.overall.unwrap_or_default();
    rows.push([
        "Overall".into(),
        fmt_opt(eval.overall.pearson),
        fmt_opt(top),
        rank.map_or_else(|| "-".into(), |x| x.to_string()),
        eval.overall.n.to_string(),
    ]);
    let mut out = align_columns(&rows);
    if eval.per_language.iter().any(|r| r.unreliable) {
        let _ = writeln!(
            out,
            "* fewer than {MIN_RELIABLE_PAIRS} pairs; correlation unreliable"
        );
    }
    out
}

fn align_columns<const N: usize>(rows: &[[String; N]]) -> String {
    let mut widths = [0usize; N];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub model_tag: String,
    pub augmented: bool,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationGroup {
    pub model_tag: String,
    pub plain: Option<MetricsReport>,
    pub augmented: Option<MetricsReport>,
    /// Augmented minus plain Pearson, when both are known.
    pub delta_pearson: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub groups: Vec<AblationGroup>,
}

/// Groups rows by model tag (in order of first appearance) with the plain
/// and augmented runs side by side.
pub fn compare_ablation(rows: &[AblationRow]) -> Result<AblationTable> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter(
            "ablation needs at least one row".into(),
        ));
    }
    let mut groups: Vec<AblationGroup> = Vec::new();
    for row in rows {
        let idx = match groups.iter().position(|g| g.model_tag == row.model_tag) {
            Some(i) => i,
            None => {
                groups.push(AblationGroup {
                    model_tag: row.model_tag.clone(),
                    plain: None,
                    augmented: None,
                    delta_pearson: None,
                });
                groups.len() - 1
            }
        };
        let slot = if row.augmented {
            &mut groups[idx].augmented
        } else {
            &mut groups[idx].plain
        };
        if slot.is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate ablation row ({}, augmented={})",
                row.model_tag, row.augmented
            )));
        }
        *slot = Some(row.report.clone());
    }
    for g in &mut groups {
        g.delta_pearson = match (&g.plain, &g.augmented) {
            (Some(p), Some(a)) => a.pearson.zip(p.pearson).map(|(a, p)| a - p),
            _ => None,
        };
    }
    Ok(AblationTable { groups })
}

impl AblationTable {
    /// Plain-text table: Model, Aug., Pearson, MSE, RMSE, MAE, SMAPE, R2,
    /// Δ Pearson (on the augmented row).
    pub fn render(&self) -> String {
        let mut rows: Vec<[String; 9]> = vec![[
            "Model", "Aug.", "Pearson", "MSE", "RMSE", "MAE", "SMAPE", "R2", "Delta",
        ]
        .map(String::from)];
        for g in &self.groups {
            let entries = [(false, &g.plain), (true, &g.augmented)];
            let mut first = true;
            for (aug, report) in entries {
                let Some(r) = report else { continue };
                let delta = if aug {
                    g.delta_pearson
                        .map_or_else(String::new, |d| format!("{d:+.3}"))
                } else {
                    String::new()
                };
                rows.push([
                    if first {
                        g.model_tag.clone()
                    } else {
                        String::new()
                    },
                    if aug { "Yes" } else { "No" }.into(),
                    fmt_opt(r.pearson),
                    format!("{:.3}", r.mse),
                    format!("{:.3}", r.rmse),
                    format!("{:.3}", r.mae),
                    r.smape.map_or_else(|| "-".into(), |s| format!("{s:.1}")),
                    fmt_opt(r.r2),
                    delta,
                ]);
                first = false;
            }
        }
        align_columns(&rows)
    }

    /// One TSV row per (model, augmented) with every metric.
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("model\taugmented\tpearson\tmse\trmse\tmae\tsmape\tr2\tdelta_pearson\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for g in &self.groups {
            for (aug, report) in [(false, &g.plain), (true, &g.augmented)] {
                let Some(r) = report else { continue };
                let delta = if aug {
                    opt(g.delta_pearson)
                } else {
                    String::new()
                };
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    g.model_tag,
                    aug,
                    opt(r.pearson),
                    r.mse,
                    r.rmse,
                    r.mae,
                    opt(r.smape),
                    opt(r.r2),
                    delta
                );
            }
        }
        out
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub const LANGUAGE_DISTRIBUTION_FILE: &str = "language_distribution.tsv";
pub const LENGTH_HISTOGRAM_FILE: &str = "length_histogram.tsv";
pub const SCORE_HISTOGRAM_FILE: &str = "score_histogram.tsv";

fn histogram_table(
    report: &StatsReport,
    pick: impl Fn(&crate::stats::GroupStats) -> Option<&HistogramSpec>,
) -> Option<String> {
    let overall = pick(&report.overall)?;
    let mut columns: Vec<(String, &HistogramSpec)> = vec![("overall".into(), overall)];
    for (lang, g) in &report.per_language {
        columns.push((lang.name().to_string(), pick(g)?));
    }
    let mut out = String::from("bin_lo\tbin_hi");
    for (name, _) in &columns {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for (i, w) in overall.edges.windows(2).enumerate() {
        let _ = write!(out, "{}\t{}", w[0], w[1]);
        for (_, h) in &columns {
            let _ = write!(out, "\t{}", h.counts[i]);
        }
        out.push('\n');
    }
    Some(out)
}

/// Writes plot-ready TSV files into `dir`: language counts, and length and
/// score histograms with one column per group (`overall` then each
/// language). The score file is skipped for unscored corpora. Returns the
/// written file names.
pub fn emit_plot_data(report: &StatsReport, dir: impl AsRef<Path>) -> Result<Vec<String>> {
    let dir = dir.as_ref();
    let mut written = Vec::new();

    let mut langs = String::from("language\tcount\n");
    for (lang, g) in &report.per_language {
        let _ = writeln!(langs, "{}\t{}", lang.name(), g.count);
    }
    write_file(&dir.join(LANGUAGE_DISTRIBUTION_FILE), &langs)?;
    written.push(LANGUAGE_DISTRIBUTION_FILE.to_string());

    if let Some(t) = histogram_table(report, |g| Some(&g.length_histogram)) {
        write_file(&dir.join(LENGTH_HISTOGRAM_FILE), &t)?;
        written.push(LENGTH_HISTOGRAM_FILE.to_string());
    }
    if let Some(t) = histogram_table(report, |g| g.score_histogram.as_ref()) {
        write_file(&dir.join(SCORE_HISTOGRAM_FILE), &t)?;
        written.push(SCORE_HISTOGRAM_FILE.to_string());
    }
    Ok(written)
}
