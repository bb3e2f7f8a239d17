//! Deterministic synthetic corpora.
//!
//! [`mint_like`] produces stand-ins for the public training (9,491 tweets,
//! six languages) and test (3,881 tweets, ten languages) files with
//! per-language length and score distributions shaped after the published
//! corpus description. Raw texts carry mentions, URLs and punctuation so
//! that cleaning matters; the whitespace token count after cleaning equals
//! the planned length.
//!
//! [`planted_corpus`] produces texts whose scores are an affine function
//! of planted word counts plus Gaussian noise, for checking the baseline.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal, Poisson};

use crate::corpus::{Corpus, Language, SplitName, Tweet, MAX_SCORE, MIN_SCORE};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MintSplit {
    Train,
    Test,
}

const TRAIN_COUNTS: [(Language, usize); 6] = [
    (Language::English, 1587),
    (Language::Spanish, 1592),
    (Language::Portuguese, 1596),
    (Language::French, 1588),
    (Language::Italian, 1532),
    (Language::Chinese, 1596),
];

const TEST_COUNTS: [(Language, usize); 10] = [
    (Language::English, 401),
    (Language::Spanish, 400),
    (Language::Portuguese, 400),
    (Language::French, 400),
    (Language::Italian, 400),
    (Language::Chinese, 400),
    (Language::Dutch, 400),
    (Language::Korean, 400),
    (Language::Arabic, 400),
    (Language::Hindi, 280),
];

#[derive(Debug, Clone, Copy)]
enum LengthModel {
    /// Rounded Gamma(shape, scale), at least one token.
    Gamma(f64, f64),
    /// 1 + Poisson(mean).
    OnePlusPoisson(f64),
}

#[derive(Debug, Clone, Copy)]
enum ScoreModel {
    /// 1 + Gamma(shape, scale).
    ShiftedGamma(f64, f64),
    /// 1 + Exponential(mean).
    ShiftedExp(f64),
    Normal(f64, f64),
}

fn length_model(lang: Language) -> LengthModel {
    match lang {
        Language::Chinese => LengthModel::OnePlusPoisson(2.5),
        Language::Korean => LengthModel::Gamma(5.0, 1.0),
        Language::Hindi => LengthModel::Gamma(8.0, 1.9),
        _ => LengthModel::Gamma(6.0, 1.75),
    }
}

fn score_model(lang: Language) -> ScoreModel {
    match lang {
        Language::Spanish | Language::Chinese => ScoreModel::ShiftedGamma(2.2, 0.5),
        Language::Portuguese => ScoreModel::ShiftedGamma(2.0, 0.48),
        Language::Dutch | Language::Arabic => ScoreModel::ShiftedExp(0.5),
        Language::Korean => ScoreModel::Normal(3.0, 0.55),
        Language::Hindi => ScoreModel::Normal(2.5, 0.7),
        _ => ScoreModel::ShiftedGamma(2.0, 0.45),
    }
}

fn draw_length(model: LengthModel, rng: &mut ChaCha8Rng) -> usize {
    match model {
        LengthModel::Gamma(shape, scale) => {
            let g = Gamma::new(shape, scale).expect("valid gamma");
            (g.sample(rng).round() as usize).max(1)
        }
        LengthModel::OnePlusPoisson(mean) => {
            let p = Poisson::new(mean).expect("valid poisson");
            1 + p.sample(rng) as usize
        }
    }
}

fn draw_score(model: ScoreModel, rng: &mut ChaCha8Rng) -> f64 {
    let raw: f64 = match model {
        ScoreModel::ShiftedGamma(shape, scale) => {
            1.0 + Gamma::new(shape, scale).expect("valid").sample(rng)
        }
        ScoreModel::ShiftedExp(mean) => 1.0 + Exp::new(1.0 / mean).expect("valid").sample(rng),
        ScoreModel::Normal(mean, sd) => Normal::new(mean, sd).expect("valid").sample(rng),
    };
    ((raw.clamp(MIN_SCORE, MAX_SCORE)) * 100.0).round() / 100.0
}

/// Characters used to build pseudo-words for each script.
fn alphabet(lang: Language) -> Vec<char> {
    let range = |lo: u32, hi: u32| (lo..=hi).filter_map(char::from_u32).collect::<Vec<_>>();
    match lang {
        Language::Chinese => range(0x4E00, 0x4FFF),
        Language::Korean => range(0xAC00, 0xAD7F),
        Language::Arabic => range(0x0627, 0x063A),
        Language::Hindi => range(0x0915, 0x0939),
        _ => "abcdefghijklmnopqrstuvwxyzáéíóúàèçñ".chars().collect(),
    }
}

fn make_word(letters: &[char], len: usize, rng: &mut ChaCha8Rng) -> String {
    (0..len)
        .map(|_| *letters.choose(rng).expect("non-empty alphabet"))
        .collect()
}

struct Vocabulary {
    plain: Vec<String>,
    /// Words whose frequency grows with the intimacy score.
    cues: Vec<String>,
}

fn vocabulary(lang: Language, rng: &mut ChaCha8Rng) -> Vocabulary {
    let letters = alphabet(lang);
    let word_len = |rng: &mut ChaCha8Rng| match lang {
        Language::Chinese => rng.random_range(1..=4),
        Language::Korean => rng.random_range(1..=3),
        _ => rng.random_range(2..=8),
    };
    let mut plain = Vec::with_capacity(400);
    for _ in 0..400 {
        let len = word_len(rng);
        plain.push(make_word(&letters, len, rng));
    }
    let mut cues = Vec::with_capacity(30);
    for _ in 0..30 {
        let len = word_len(rng).max(2);
        cues.push(make_word(&letters, len, rng));
    }
    Vocabulary { plain, cues }
}

const PUNCT: [&str; 6] = ["!", ",", ".", "?", "...", "!!"];

fn render_tweet(words: Vec<String>, rng: &mut ChaCha8Rng) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(words.len() + 3);
    if rng.random_bool(0.3) {
        parts.push("@user".into());
    }
    for mut w in words {
        if rng.random_bool(0.12) {
            w.push_str(PUNCT.choose(rng).expect("non-empty"));
        }
        parts.push(w);
    }
    if rng.random_bool(0.15) {
        let pos = rng.random_range(0..=parts.len());
        parts.insert(
            pos,
            format!("https://t.co/{}", rng.random_range(10_000u32..99_999)),
        );
    }
    if rng.random_bool(0.1) {
        parts.push("@user".into());
    }
    parts.join(" ")
}

/// Synthetic corpus with the size and language mix of the public split.
pub fn mint_like(split: MintSplit, seed_value: u64) -> Corpus {
    let (counts, tag, name): (&[(Language, usize)], &str, SplitName) = match split {
        MintSplit::Train => (&TRAIN_COUNTS, "mint-train", SplitName::Train),
        MintSplit::Test => (&TEST_COUNTS, "mint-test", SplitName::Test),
    };
    // vocabularies are shared between the two splits
    let mut vocab_rng = seed::rng(seed::mix(seed_value, &[seed::tag("mint-vocab")]));
    let vocabs: Vec<(Language, Vocabulary)> = Language::ALL
        .iter()
        .map(|&l| (l, vocabulary(l, &mut vocab_rng)))
        .collect();

    let mut rng = seed::rng(seed::mix(seed_value, &[seed::tag(tag)]));
    let mut tweets = Vec::new();
    for &(lang, count) in counts {
        let vocab = &vocabs[lang.index()].1;
        for _ in 0..count {
            let score = draw_score(score_model(lang), &mut rng);
            let len = draw_length(length_model(lang), &mut rng);
            let cue_rate = (score - MIN_SCORE) / (MAX_SCORE - MIN_SCORE) * 0.6;
            let words: Vec<String> = (0..len)
                .map(|_| {
                    let pool = if rng.random_bool(cue_rate) {
                        &vocab.cues
                    } else {
                        &vocab.plain
                    };
                    pool.choose(&mut rng).expect("non-empty").clone()
                })
                .collect();
            tweets.push((lang, render_tweet(words, &mut rng), score));
        }
    }
    // interleave languages like a shuffled release file
    let mut order: Vec<usize> = (0..tweets.len()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let tweets = order
        .into_iter()
        .enumerate()
        .map(|(id, i)| {
            let (lang, text, score) = &tweets[i];
            Tweet::new(id as u64, text.clone(), *lang, Some(*score))
                .expect("generated tweets are valid")
        })
        .collect();
    Corpus::new(tweets, format!("synthetic {tag} seed={seed_value}"), name).expect("ids are unique")
}

/// Planted-signal corpus: every text has `WORDS_PER_TEXT` five-letter
/// words drawn from a fixed vocabulary; a subset of the vocabulary carries
/// a weight, and the score is `PLANTED_INTERCEPT + Σ weight(word) + noise`.
pub fn planted_corpus(n: usize, seed_value: u64, noise_sd: f64) -> Corpus {
    let mut vocab_rng = seed::rng(seed::mix(seed_value, &[seed::tag("planted-vocab")]));
    let words: Vec<String> = (0..PLANTED_VOCAB)
        .map(|_| make_word(&alphabet(Language::English)[..26], 5, &mut vocab_rng))
        .collect();
    let weights: Vec<f64> = (0..PLANTED_VOCAB)
        .map(|i| {
            if i < PLANTED_WEIGHTED {
                let magnitude = vocab_rng.random_range(0.2..0.6);
                if i % 2 == 0 {
                    magnitude
                } else {
                    -magnitude
                }
            } else {
                0.0
            }
        })
        .collect();

    let mut rng = seed::rng(seed::mix(seed_value, &[seed::tag("planted-rows")]));
    let noise = Normal::new(0.0, noise_sd).expect("valid noise");
    let tweets = (0..n)
        .map(|id| {
            let picks: Vec<usize> = (0..WORDS_PER_TEXT)
                .map(|_| rng.random_range(0..PLANTED_VOCAB))
                .collect();
            let signal: f64 = picks.iter().map(|&i| weights[i]).sum();
            let score =
                (PLANTED_INTERCEPT + signal + noise.sample(&mut rng)).clamp(MIN_SCORE, MAX_SCORE);
            let text = picks
                .iter()
                .map(|&i| words[i].as_str())
                .collect::<Vec<_>>()
                .join(" ");
            Tweet::new(id as u64, text, Language::English, Some(score)).expect("valid")
        })
        .collect();
    Corpus::new(
        tweets,
        format!("planted seed={seed_value}"),
        SplitName::Custom,
    )
    .expect("unique ids")
}

pub const PLANTED_VOCAB: usize = 60;
pub const PLANTED_WEIGHTED: usize = 20;
pub const WORDS_PER_TEXT: usize = 8;
pub const PLANTED_INTERCEPT: f64 = 3.0;
