//! EDA-style text augmentation: synonym replacement, random insertion,
//! random swap and random deletion over whitespace tokens.
//!
//! Each generated example draws from its own ChaCha8 stream seeded with
//! `mix(config.seed, [origin_id, op_index, replica])` (see [`crate::seed`]),
//! so corpus-level output does not depend on how work is scheduled.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, IndexedRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    clean_text, tokenize, Corpus, DataFormat, Language, SplitName, Tweet, DEFAULT_MAX_LEN,
};
use crate::error::{Error, Result};
use crate::seed;

/// Synonyms keyed by language and lowercased token.
#[derive(Debug, Clone, Default)]
pub struct SynonymLexicon {
    entries: HashMap<(Language, String), Vec<String>>,
}

impl SynonymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds synonyms for `token`. Synonyms equal to the key (ignoring case)
    /// and repeats are dropped; an entry left empty is not stored.
    pub fn insert<S: AsRef<str>>(
        &mut self,
        language: Language,
        token: &str,
        synonyms: &[S],
    ) -> Result<()> {
        let key = token.to_lowercase();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!(
                "invalid lexicon key `{token}`"
            )));
        }
        let list = self.entries.entry((language, key.clone())).or_default();
        for syn in synonyms {
            let syn = syn.as_ref().trim();
            if syn.is_empty() || syn.contains(char::is_whitespace) {
                return Err(Error::InvalidParameter(format!(
                    "synonym `{syn}` for `{token}` must be a single non-empty token"
                )));
            }
            if syn.to_lowercase() != key && !list.iter().any(|s| s == syn) {
                list.push(syn.to_string());
            }
        }
        if list.is_empty() {
            self.entries.remove(&(language, key));
        }
        Ok(())
    }

    /// Reads `language \t token \t syn1|syn2|...` lines. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lexicon = Self::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let row_err = |field: &str, message: String| Error::Row {
                path: path.to_path_buf(),
                row: i + 1,
                field: field.into(),
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(row_err(
                    "line",
                    format!("expected 3 tab-separated fields, got {}", fields.len()),
                ));
            }
            let language: Language = fields[0]
                .parse()
                .map_err(|e: crate::corpus::UnknownLanguage| row_err("language", e.to_string()))?;
            let synonyms: Vec<&str> = fields[2].split('|').collect();
            lexicon
                .insert(language, fields[1].trim(), &synonyms)
                .map_err(|e| row_err("synonyms", e.to_string()))?;
        }
        Ok(lexicon)
    }

    pub fn synonyms(&self, language: Language, token: &str) -> Option<&[String]> {
        self.entries
            .get(&(language, token.to_lowercase()))
            .map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when `token` is one of the synonyms listed for `language`.
    pub fn is_listed_synonym(&self, language: Language, token: &str) -> bool {
        self.entries
            .iter()
            .any(|((l, _), syns)| *l == language && syns.iter().any(|s| s == token))
    }
}

#[derive(Debug, Clone, Default)]
pub struct StopwordList {
    words: HashMap<Language, HashSet<String>>,
}

impl StopwordList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, language: Language, word: &str) {
        let w = word.trim().to_lowercase();
        if !w.is_empty() {
            self.words.entry(language).or_default().insert(w);
        }
    }

    /// One stopword per line.
    pub fn load_file(&mut self, language: Language, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for line in content.lines() {
            self.insert(language, line);
        }
        Ok(())
    }

    /// Loads every `<language>.txt` in `dir`, where the stem is a language
    /// name or ISO code (`en.txt`, `spanish.txt`, ...). Other files are
    /// ignored.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut list = Self::new();
        let mut entries: Vec<_> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(dir, e))?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(lang) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse::<Language>().ok())
            else {
                continue;
            };
            list.load_file(lang, &path)?;
        }
        Ok(list)
    }

    pub fn contains(&self, language: Language, token: &str) -> bool {
        self.words
            .get(&language)
            .is_some_and(|set| set.contains(&token.to_lowercase()))
    }

    pub fn has_language(&self, language: Language) -> bool {
        self.words.get(&language).is_some_and(|s| !s.is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentOp {
    SynonymReplacement,
    RandomInsertion,
    RandomSwap,
    RandomDeletion,
}

impl AugmentOp {
    pub const ALL: [AugmentOp; 4] = [
        AugmentOp::SynonymReplacement,
        AugmentOp::RandomInsertion,
        AugmentOp::RandomSwap,
        AugmentOp::RandomDeletion,
    ];

    pub fn index(self) -> u64 {
        self as u64
    }

    pub fn name(self) -> &'static str {
        match self {
            AugmentOp::SynonymReplacement => "synonym_replacement",
            AugmentOp::RandomInsertion => "random_insertion",
            AugmentOp::RandomSwap => "random_swap",
            AugmentOp::RandomDeletion => "random_deletion",
        }
    }

    fn uses_lexicon(self) -> bool {
        matches!(
            self,
            AugmentOp::SynonymReplacement | AugmentOp::RandomInsertion
        )
    }
}

impl fmt::Display for AugmentOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AugmentOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown augmentation op `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub alpha_sr: f64,
    pub alpha_ri: f64,
    pub alpha_rs: f64,
    /// Per-token deletion probability.
    pub p_rd: f64,
    /// Examples generated per original tweet and enabled operation.
    pub n_aug: usize,
    pub seed: u64,
    pub enabled_ops: Vec<AugmentOp>,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            alpha_sr: 0.1,
            alpha_ri: 0.1,
            alpha_rs: 0.1,
            p_rd: 0.1,
            n_aug: 1,
            seed: 0,
            enabled_ops: AugmentOp::ALL.to_vec(),
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_sr", self.alpha_sr),
            ("alpha_ri", self.alpha_ri),
            ("alpha_rs", self.alpha_rs),
            ("p_rd", self.p_rd),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.n_aug == 0 {
            return Err(Error::InvalidParameter("n_aug must be positive".into()));
        }
        if self.enabled_ops.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one augmentation op must be enabled".into(),
            ));
        }
        Ok(())
    }

    /// Ops in canonical order without repeats.
    fn ops(&self) -> Vec<AugmentOp> {
        let mut ops = self.enabled_ops.clone();
        ops.sort();
        ops.dedup();
        ops
    }
}

/// Number of edits for a sentence of `len` tokens: `max(1, round(alpha * len))`,
/// rounding half away from zero.
pub fn edit_count(alpha: f64, len: usize) -> usize {
    ((alpha * len as f64).round() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedExample {
    pub origin_id: u64,
    pub language: Language,
    pub op: AugmentOp,
    pub text: String,
    pub score: f64,
    pub replica: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmentation {
    pub examples: Vec<AugmentedExample>,
    /// Tweets that cleaned to nothing and were skipped.
    pub skipped_empty: usize,
}

fn eligible_positions(
    tokens: &[String],
    language: Language,
    lexicon: &SynonymLexicon,
    stopwords: &StopwordList,
) -> Vec<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            !stopwords.contains(language, t) && lexicon.synonyms(language, t).is_some()
        })
        .map(|(i, _)| i)
        .collect()
}

/// Replaces up to `n` distinct eligible tokens (non-stopwords with a
/// lexicon entry) by a uniformly drawn synonym.
pub fn synonym_replacement<R: Rng + ?Sized>(
    tokens: &[String],
    language: Language,
    n: usize,
    lexicon: &SynonymLexicon,
    stopwords: &StopwordList,
    rng: &mut R,
) -> Vec<String> {
    let mut out = tokens.to_vec();
    let eligible = eligible_positions(tokens, language, lexicon, stopwords);
    if eligible.is_empty() {
        return out;
    }
    let k = n.min(eligible.len());
    for pick in index::sample(rng, eligible.len(), k) {
        let pos = eligible[pick];
        let syns = lexicon
            .synonyms(language, &tokens[pos])
            .expect("eligible positions have synonyms");
        out[pos] = syns
            .choose(rng)
            .expect("synonym lists are non-empty")
            .clone();
    }
    out
}

/// Performs `n` insertions, each placing a synonym of a random eligible
/// token of the input at a uniformly random position.
pub fn random_insertion<R: Rng + ?Sized>(
    tokens: &[String],
    language: Language,
    n: usize,
    lexicon: &SynonymLexicon,
    stopwords: &StopwordList,
    rng: &mut R,
) -> Vec<String> {
    let mut out = tokens.to_vec();
    let eligible = eligible_positions(tokens, language, lexicon, stopwords);
    if eligible.is_empty() {
        return out;
    }
    for _ in 0..n {
        let source = &tokens[*eligible.choose(rng).expect("non-empty")];
        let syns = lexicon.synonyms(language, source).expect("eligible");
        let syn = syns.choose(rng).expect("non-empty").clone();
        let at = rng.random_range(0..=out.len());
        out.insert(at, syn);
    }
    out
}

/// `n` swaps of two distinct uniformly chosen positions.
pub fn random_swap<R: Rng + ?Sized>(tokens: &[String], n: usize, rng: &mut R) -> Vec<String> {
    let mut out = tokens.to_vec();
    if out.len() < 2 {
        return out;
    }
    for _ in 0..n {
        let i = rng.random_range(0..out.len());
        // second index drawn from the remaining len - 1 positions
        let mut j = rng.random_range(0..out.len() - 1);
        if j >= i {
            j += 1;
        }
        out.swap(i, j);
    }
    out
}

/// Drops each token with probability `p`. If every token would go, one
/// uniformly chosen input token survives.
pub fn random_deletion<R: Rng + ?Sized>(tokens: &[String], p: f64, rng: &mut R) -> Vec<String> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let p = p.clamp(0.0, 1.0);
    let out: Vec<String> = tokens
        .iter()
        .filter(|_| !rng.random_bool(p))
        .cloned()
        .collect();
    if out.is_empty() {
        vec![tokens.choose(rng).expect("non-empty").clone()]
    } else {
        out
    }
}

fn apply_op<R: Rng + ?Sized>(
    op: AugmentOp,
    tokens: &[String],
    language: Language,
    config: &AugmentConfig,
    lexicon: &SynonymLexicon,
    stopwords: &StopwordList,
    rng: &mut R,
) -> Vec<String> {
    let len = tokens.len();
    match op {
        AugmentOp::SynonymReplacement => synonym_replacement(
            tokens,
            language,
            edit_count(config.alpha_sr, len),
            lexicon,
            stopwords,
            rng,
        ),
        AugmentOp::RandomInsertion => random_insertion(
            tokens,
            language,
            edit_count(config.alpha_ri, len),
            lexicon,
            stopwords,
            rng,
        ),
        AugmentOp::RandomSwap => random_swap(tokens, edit_count(config.alpha_rs, len), rng),
        AugmentOp::RandomDeletion => random_deletion(tokens, config.p_rd, rng),
    }
}

/// Seed of the random stream behind one augmented example.
pub fn example_seed(base: u64, origin_id: u64, op: AugmentOp, replica: usize) -> u64 {
    seed::mix(base, &[origin_id, op.index(), replica as u64])
}

/// Runs every enabled op `n_aug` times on every tweet. Output order is
/// tweet order, then op order, then replica. Examples whose text equals the
/// cleaned original are dropped.
pub fn eda_augment(
    corpus: &Corpus,
    config: &AugmentConfig,
    lexicon: &SynonymLexicon,
    stopwords: &StopwordList,
) -> Result<Augmentation> {
    config.validate()?;
    let ops = config.ops();
    let scores = corpus.scores()?;

    if ops.iter().any(|op| op.uses_lexicon()) {
        let mut langs: Vec<Language> = corpus.iter().map(|t| t.language).collect();
        langs.sort();
        langs.dedup();
        if let Some(missing) = langs.into_iter().find(|&l| !stopwords.has_language(l)) {
            return Err(Error::InvalidParameter(format!(
                "no stopwords loaded for {missing}"
            )));
        }
    }

    let per_tweet: Vec<Option<Vec<AugmentedExample>>> = corpus
        .tweets()
        .par_iter()
        .zip(scores.par_iter())
        .map(|(tweet, &score)| {
            let cleaned = clean_text(&tweet.text);
            let seq = tokenize(&cleaned, DEFAULT_MAX_LEN);
            if seq.is_empty() {
                return None;
            }
            let original = seq.join();
            let mut out = Vec::new();
            for &op in &ops {
                for replica in 0..config.n_aug {
                    let mut rng = seed::rng(example_seed(config.seed, tweet.id, op, replica));
                    let edited = apply_op(
                        op,
                        &seq.tokens,
                        tweet.language,
                        config,
                        lexicon,
                        stopwords,
                        &mut rng,
                    );
                    let text = edited.join(" ");
                    if text != original {
                        out.push(AugmentedExample {
                            origin_id: tweet.id,
                            language: tweet.language,
                            op,
                            text,
                            score,
                            replica,
                        });
                    }
                }
            }
            Some(out)
        })
        .collect();

    let skipped_empty = per_tweet.iter().filter(|r| r.is_none()).count();
    if skipped_empty > 0 {
        log::warn!("{skipped_empty} tweet(s) cleaned to empty text and were not augmented");
    }
    Ok(Augmentation {
        examples: per_tweet.into_iter().flatten().flatten().collect(),
        skipped_empty,
    })
}

/// Writes augmented examples with the corpus schema plus `origin_id`, `op`
/// and `replica` columns.
pub fn write_augmented(
    examples: &[AugmentedExample],
    path: impl AsRef<Path>,
    format: DataFormat,
) -> Result<()> {
    let path = path.as_ref();
    let header = ["text", "label", "language", "origin_id", "op", "replica"];
    let mut rows = Vec::with_capacity(examples.len());
    for ex in examples {
        if format == DataFormat::Tsv && ex.text.contains(['\t', '\n', '\r']) {
            return Err(Error::format(
                path,
                "augmented text contains a tab or line break",
            ));
        }
        rows.push(vec![
            ex.text.clone(),
            ex.score.to_string(),
            ex.language.name().to_string(),
            ex.origin_id.to_string(),
            ex.op.name().to_string(),
            ex.replica.to_string(),
        ]);
    }
    crate::corpus::io_write_records(path, format, &header, &rows)
}

/// Training corpus made of the originals followed by the augmented
/// examples; the latter get ids after the largest original id.
pub fn with_augmented(original: &Corpus, examples: &[AugmentedExample]) -> Result<Corpus> {
    let next = original.iter().map(|t| t.id + 1).max().unwrap_or(0);
    let mut tweets = original.tweets().to_vec();
    for (i, ex) in examples.iter().enumerate() {
        tweets.push(Tweet::new(
            next + i as u64,
            ex.text.clone(),
            ex.language,
            Some(ex.score),
        )?);
    }
    Corpus::new(
        tweets,
        format!("{} + {} augmented", original.source, examples.len()),
        SplitName::Train,
    )
}
