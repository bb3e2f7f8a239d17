//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion fails that is not listed in `KNOWN_UNATTAINABLE`.
//!
//! Stats criteria run on the public corpus when `INTIMACY_MINT_TRAIN` and
//! `INTIMACY_MINT_TEST` point at it, and on the bundled synthetic fixture
//! otherwise.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use intimacy_core::augment::{
    eda_augment, random_deletion, random_insertion, random_swap, synonym_replacement,
    AugmentConfig, AugmentOp, StopwordList, SynonymLexicon,
};
use intimacy_core::baseline::{self, FeatureHasher, GdParams, Optimizer, RidgeProblem, SparseVec};
use intimacy_core::corpus::{
    load_dataset, stratified_split, write_dataset, DataFormat, SplitName, SplitSpec,
};
use intimacy_core::metrics::{self, PairedSeries};
use intimacy_core::seed;
use intimacy_core::stats::{length_stats, score_stats, DistributionSummary};
use intimacy_core::synth::{mint_like, planted_corpus, MintSplit};
use intimacy_core::{Corpus, Language, Tweet};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot hold as stated, with the reason. They still run
/// and still print FAIL.
const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "published-rmse-consistency",
    "sqrt(.797) = 0.89275 rounds to .893 but the published RMSE is .892",
)];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(cond: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: cond,
        detail: detail.into(),
    }
}

fn rng(label: &str) -> ChaCha8Rng {
    seed::rng(seed::mix(20_231, &[seed::tag(label)]))
}

fn random_series(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(2..=500);
    let gold = (0..n).map(|_| rng.random_range(1.0..=5.0)).collect();
    let pred = (0..n).map(|_| rng.random_range(1.0..=5.0)).collect();
    (gold, pred)
}

// ---- naive oracles -------------------------------------------------------

fn naive_mean(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (naive_mean(x), naive_mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn naive_mse(g: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..g.len() {
        s += (g[i] - p[i]).powi(2);
    }
    s / g.len() as f64
}

fn naive_mae(g: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..g.len() {
        s += (g[i] - p[i]).abs();
    }
    s / g.len() as f64
}

fn naive_smape(g: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..g.len() {
        s += (g[i] - p[i]).abs() / ((g[i].abs() + p[i].abs()) / 2.0);
    }
    100.0 * s / g.len() as f64
}

fn naive_variance(v: &[f64]) -> f64 {
    let m = naive_mean(v);
    let mut s = 0.0;
    for x in v {
        s += (x - m).powi(2);
    }
    s / v.len() as f64
}

fn naive_r2(g: &[f64], p: &[f64]) -> f64 {
    1.0 - naive_mse(g, p) / naive_variance(g)
}

// ---- criteria ------------------------------------------------------------

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng("metric-oracle");
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (g, p) = random_series(&mut rng);
        let s = PairedSeries::new(g.clone(), p.clone()).unwrap();
        let pairs = [
            (metrics::pearson(&s).unwrap(), naive_pearson(&g, &p)),
            (metrics::mse(&s), naive_mse(&g, &p)),
            (metrics::rmse(&s), naive_mse(&g, &p).sqrt()),
            (metrics::mae(&s), naive_mae(&g, &p)),
            (metrics::smape(&s).unwrap(), naive_smape(&g, &p)),
            (metrics::r2(&s).unwrap(), naive_r2(&g, &p)),
        ];
        for (a, b) in pairs {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("1000 series, max |diff| {worst:.2e}, {elapsed:.2?}"),
    )
}

fn published_rmse_consistency() -> Outcome {
    let rows = [
        (0.771, "0.878"),
        (0.704, "0.839"),
        (0.762, "0.873"),
        (0.797, "0.892"),
        (0.693, "0.832"),
        (0.764, "0.874"),
        (0.708, "0.841"),
        (0.747, "0.864"),
        (0.648, "0.805"),
        (0.645, "0.803"),
    ];
    let mismatches: Vec<String> = rows
        .iter()
        .filter_map(|&(mse, published)| {
            let got = format!("{:.3}", metrics::rmse_from_mse(mse));
            (got != published).then(|| format!("mse {mse} -> {got}, published {published}"))
        })
        .collect();
    check(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "10/10 rows".to_string()
        } else {
            format!(
                "{}/10 rows; {}",
                10 - mismatches.len(),
                mismatches.join("; ")
            )
        },
    )
}

fn pearson_properties() -> Outcome {
    let mut rng = rng("pearson-properties");
    let tol = 1e-9;
    let mut failures = BTreeMap::<&str, usize>::new();
    let instances = 250;
    for _ in 0..instances {
        let (g, p) = random_series(&mut rng);
        let s = PairedSeries::new(g.clone(), p.clone()).unwrap();
        let r = metrics::pearson(&s).unwrap();

        let a = rng.random_range(0.01..100.0);
        let b = rng.random_range(-50.0..50.0);
        let scaled: Vec<f64> = p.iter().map(|x| a * x + b).collect();
        let r_affine = metrics::pearson(&PairedSeries::new(g.clone(), scaled).unwrap()).unwrap();
        if (r_affine - r).abs() > tol {
            *failures.entry("affine").or_default() += 1;
        }

        let negated: Vec<f64> = p.iter().map(|x| -x).collect();
        let r_neg = metrics::pearson(&PairedSeries::new(g.clone(), negated).unwrap()).unwrap();
        if (r_neg + r).abs() > tol {
            *failures.entry("sign").or_default() += 1;
        }

        let r_sym = metrics::pearson(&PairedSeries::new(p.clone(), g.clone()).unwrap()).unwrap();
        if (r_sym - r).abs() > tol {
            *failures.entry("symmetry").or_default() += 1;
        }

        let identity = 1.0 - metrics::mse(&s) / naive_variance(&g);
        if (metrics::r2(&s).unwrap() - identity).abs() > tol {
            *failures.entry("r2").or_default() += 1;
        }
    }
    check(
        failures.is_empty(),
        format!("{instances} instances x 4 properties, failures {failures:?}"),
    )
}

struct AugmentFixture {
    sentences: Vec<Vec<String>>,
    lexicon: SynonymLexicon,
    stopwords: StopwordList,
}

fn augment_fixture() -> AugmentFixture {
    let mut rng = rng("augment-fixture");
    let letters: Vec<char> = "abcdefghijklmnopqrstuvwxyz".chars().collect();
    let word = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.random_range(3..=8);
        (0..len).map(|_| *letters.choose(rng).unwrap()).collect()
    };
    let vocab: Vec<String> = (0..300).map(|_| word(&mut rng)).collect();
    let mut lexicon = SynonymLexicon::new();
    for w in vocab.iter().take(150) {
        let syns: Vec<String> = (0..rng.random_range(1..=3))
            .map(|_| format!("{}x", word(&mut rng)))
            .collect();
        lexicon.insert(Language::English, w, &syns).unwrap();
    }
    let mut stopwords = StopwordList::new();
    for w in vocab.iter().skip(280) {
        stopwords.insert(Language::English, w);
    }
    let sentences = (0..1000)
        .map(|_| {
            let len = rng.random_range(1..=30);
            (0..len)
                .map(|_| vocab.choose(&mut rng).unwrap().clone())
                .collect()
        })
        .collect();
    AugmentFixture {
        sentences,
        lexicon,
        stopwords,
    }
}

fn sorted(v: &[String]) -> Vec<String> {
    let mut v = v.to_vec();
    v.sort();
    v
}

fn augmentation_properties() -> Outcome {
    let fx = augment_fixture();
    let lang = Language::English;
    let mut rng = rng("augment-properties");
    let mut failures = BTreeMap::<&str, usize>::new();
    let mut fail = |k| *failures.entry(k).or_default() += 1;

    for tokens in &fx.sentences {
        let n = rng.random_range(1..=5);
        if sorted(&random_swap(tokens, n, &mut rng)) != sorted(tokens) {
            fail("swap-multiset");
        }
        let p = rng.random_range(0.0..=1.0);
        if random_deletion(tokens, p, &mut rng).is_empty() {
            fail("deletion-nonempty");
        }
        let replaced = synonym_replacement(tokens, lang, n, &fx.lexicon, &fx.stopwords, &mut rng);
        let sr_ok = replaced.len() == tokens.len()
            && replaced.iter().zip(tokens).all(|(new, old)| {
                new == old
                    || fx
                        .lexicon
                        .synonyms(lang, old)
                        .is_some_and(|s| s.iter().any(|x| x == new))
            });
        if !sr_ok {
            fail("lexicon-membership");
        }
        let inserted = random_insertion(tokens, lang, n, &fx.lexicon, &fx.stopwords, &mut rng);
        let mut remaining = sorted(tokens);
        let mut extra = Vec::new();
        for t in sorted(&inserted) {
            match remaining.iter().position(|x| *x == t) {
                Some(i) => {
                    remaining.remove(i);
                }
                None => extra.push(t),
            }
        }
        if !remaining.is_empty() || !extra.iter().all(|t| fx.lexicon.is_listed_synonym(lang, t)) {
            fail("lexicon-membership");
        }
    }

    // label preservation and determinism over the full pipeline
    let tweets: Vec<Tweet> = fx
        .sentences
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let score = 1.0 + rng.random_range(0.0..4.0);
            Tweet::new(i as u64, t.join(" "), lang, Some(score)).unwrap()
        })
        .collect();
    let corpus = Corpus::new(tweets, "augment-fixture", SplitName::Train).unwrap();
    let config = AugmentConfig {
        n_aug: 2,
        seed: 99,
        enabled_ops: vec![
            AugmentOp::SynonymReplacement,
            AugmentOp::RandomInsertion,
            AugmentOp::RandomSwap,
            AugmentOp::RandomDeletion,
        ],
        ..AugmentConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| eda_augment(&corpus, &config, &fx.lexicon, &fx.stopwords).unwrap())
    };
    let reference = run(4);
    let by_id: BTreeMap<u64, f64> = corpus.iter().map(|t| (t.id, t.score.unwrap())).collect();
    if reference
        .examples
        .iter()
        .any(|e| e.score.to_bits() != by_id[&e.origin_id].to_bits())
    {
        fail("label-preservation");
    }
    if run(4) != reference {
        fail("rerun-determinism");
    }
    for threads in [1, 2, 8] {
        if run(threads) != reference {
            fail("thread-determinism");
        }
    }
    check(
        failures.is_empty() && !reference.examples.is_empty(),
        format!(
            "1000 sentences, {} augmented examples, failures {failures:?}",
            reference.examples.len()
        ),
    )
}

fn split_contract() -> Outcome {
    let corpus = mint_like(MintSplit::Train, 2023);
    let spec = SplitSpec {
        seed: 7,
        ..SplitSpec::default()
    };
    let split = stratified_split(&corpus, &spec).unwrap();
    let parts = [&split.train, &split.validation, &split.test];
    let total: usize = parts.iter().map(|p| p.len()).sum();
    let mut ids: Vec<u64> = parts.iter().flat_map(|p| p.iter().map(|t| t.id)).collect();
    ids.sort_unstable();
    let before = ids.len();
    ids.dedup();
    let disjoint = ids.len() == before;
    let covers = ids == corpus.iter().map(|t| t.id).collect::<Vec<_>>();

    let lang_counts = |c: &Corpus| {
        let mut m = BTreeMap::<Language, usize>::new();
        for t in c {
            *m.entry(t.language).or_default() += 1;
        }
        m
    };
    let all = lang_counts(&corpus);
    let mut worst = 0.0f64;
    for (part, ratio) in parts.iter().zip(spec.ratios) {
        let counts = lang_counts(part);
        for (lang, &n) in &all {
            let k = counts.get(lang).copied().unwrap_or(0) as f64;
            // share of the language that went to this part, and share of
            // the part taken by the language
            worst = worst.max((k / n as f64 - ratio).abs());
            worst = worst.max((k / part.len() as f64 - n as f64 / corpus.len() as f64).abs());
        }
    }
    let again = stratified_split(&corpus, &spec).unwrap();
    let deterministic = again.train == split.train
        && again.validation == split.validation
        && again.test == split.test;
    check(
        corpus.len() == 9491 && total == 9491 && disjoint && covers && worst <= 0.015 && deterministic,
        format!(
            "sizes {}/{}/{} (sum {total}), disjoint {disjoint}, max proportion gap {:.2} points, deterministic {deterministic}",
            split.train.len(),
            split.validation.len(),
            split.test.len(),
            worst * 100.0
        ),
    )
}

fn stats_reproduction() -> Outcome {
    let start = Instant::now();
    let (train, test, source) = match (
        std::env::var_os("INTIMACY_MINT_TRAIN"),
        std::env::var_os("INTIMACY_MINT_TEST"),
    ) {
        (Some(tr), Some(te)) => {
            let load = |p: &std::ffi::OsStr| {
                let p = Path::new(p);
                load_dataset(p, DataFormat::from_path(p)).expect("loading corpus")
            };
            (load(&tr), load(&te), "dataset")
        }
        _ => (
            mint_like(MintSplit::Train, 2023),
            mint_like(MintSplit::Test, 2023),
            "fixture-based",
        ),
    };
    let lengths = length_stats(&train, true).unwrap();
    let scores = score_stats(&train, false).unwrap().unwrap();
    let test_scores = score_stats(&test, true).unwrap().unwrap();
    let lang = |s: &intimacy_core::stats::GroupedSummary, l: Language| -> DistributionSummary {
        s.per_language[&l].clone()
    };
    let q95_score = scores.overall.quantile(95).unwrap();
    let mean_len = lengths.overall.mean;
    let q95_len = lengths.overall.quantile(95).unwrap();
    let zh_len = lang(&lengths, Language::Chinese).mean;
    let nl_q75 = lang(&test_scores, Language::Dutch).quantile(75).unwrap();
    let ko_mean = lang(&test_scores, Language::Korean).mean;
    let elapsed = start.elapsed();
    let ok = q95_score < 3.8
        && (8.0..=12.0).contains(&mean_len)
        && q95_len < 22.0
        && (3.0..=4.0).contains(&zh_len)
        && nl_q75 < 1.8
        && (2.8..=3.2).contains(&ko_mean)
        && elapsed < Duration::from_secs(10);
    check(
        ok,
        format!(
            "[{source}] score q95 {q95_score:.2}, length mean {mean_len:.2}, length q95 {q95_len:.1}, \
             Chinese length {zh_len:.2}, Dutch q75 {nl_q75:.2}, Korean mean {ko_mean:.2}, {elapsed:.2?}"
        ),
    )
}

fn baseline_sanity() -> Outcome {
    let start = Instant::now();

    let corpus = planted_corpus(2500, 11, 0.1);
    let tweets = corpus.tweets();
    let train = Corpus::new(tweets[..2000].to_vec(), "planted-train", SplitName::Train).unwrap();
    let test = Corpus::new(tweets[2000..].to_vec(), "planted-test", SplitName::Test).unwrap();
    let model = baseline::fit(
        &train,
        &FeatureHasher::default(),
        1e-3,
        Optimizer::ClosedForm,
        &GdParams::default(),
    )
    .unwrap();
    let preds = baseline::predict(&model, &test);
    let heldout =
        metrics::pearson(&PairedSeries::new(test.scores().unwrap(), preds).unwrap()).unwrap();

    // analytic gradient vs central differences on a small hash space
    let small = FeatureHasher {
        dim: 64,
        ..FeatureHasher::default()
    };
    let sample = planted_corpus(100, 5, 0.1);
    let rows: Vec<SparseVec> = small.featurize_corpus(&sample);
    let targets = sample.scores().unwrap();
    let problem = RidgeProblem {
        rows: &rows,
        targets: &targets,
        dim: small.dim,
        lambda: 0.05,
    };
    let mut rng = rng("finite-differences");
    let h = 1e-6;
    let mut worst_grad = 0.0f64;
    for _ in 0..10 {
        let w: Vec<f64> = (0..small.dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let b = rng.random_range(1.0..5.0);
        let (g, gb) = problem.gradient(&w, b);
        let mut fd = Vec::with_capacity(small.dim + 1);
        for i in 0..small.dim {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[i] += h;
            down[i] -= h;
            fd.push((problem.objective(&up, b) - problem.objective(&down, b)) / (2.0 * h));
        }
        fd.push((problem.objective(&w, b + h) - problem.objective(&w, b - h)) / (2.0 * h));
        let analytic: Vec<f64> = g.iter().copied().chain([gb]).collect();
        let diff = analytic
            .iter()
            .zip(&fd)
            .map(|(a, f)| (a - f).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst_grad = worst_grad.max(diff / norm);
    }

    // closed form vs gradient descent
    let gd_hasher = FeatureHasher {
        dim: 256,
        ..FeatureHasher::default()
    };
    let gd_corpus = planted_corpus(200, 2, 0.1);
    let gd_params = GdParams {
        learning_rate: 1.0,
        epochs: 20_000,
        tol: 0.0,
    };
    let exact = baseline::fit(
        &gd_corpus,
        &gd_hasher,
        0.1,
        Optimizer::ClosedForm,
        &gd_params,
    )
    .unwrap();
    let descent = baseline::fit(
        &gd_corpus,
        &gd_hasher,
        0.1,
        Optimizer::GradientDescent,
        &gd_params,
    )
    .unwrap();
    let worst_weight = exact
        .weights
        .iter()
        .chain([&exact.bias])
        .zip(descent.weights.iter().chain([&descent.bias]))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let elapsed = start.elapsed();
    check(
        heldout > 0.9
            && worst_grad <= 1e-5
            && worst_weight <= 1e-4
            && elapsed < Duration::from_secs(60),
        format!(
            "held-out pearson {heldout:.4}, gradient rel err {worst_grad:.2e}, \
             closed form vs GD {worst_weight:.2e}, {elapsed:.2?}"
        ),
    )
}

fn collect_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    write_dataset(&planted_corpus(600, 3, 0.1), &data, DataFormat::Csv).unwrap();
    let resources = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../resources");
    let config = dir.path().join("experiment.toml");
    fs::write(
        &config,
        format!(
            "seed = 5\n[paths]\ntrain = {:?}\nlexicon = {:?}\nstopwords = {:?}\n\n[baseline]\ndim = 2048\nlambdas = [0.001, 0.01]\nepochs = 200\n",
            data,
            resources.join("lexicon.tsv"),
            resources.join("stopwords")
        ),
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_intimacy"))
            .arg("--config")
            .arg(&config)
            .arg("--output-dir")
            .arg(&out)
            .arg("run-all")
            .output()
            .unwrap();
        (status.status.success(), out)
    };
    let (ok_a, a) = run("first");
    let (ok_b, b) = run("second");
    if !(ok_a && ok_b) {
        return check(false, "run-all exited with an error");
    }
    let (fa, fb) = (collect_files(&a), collect_files(&b));
    let has_manifest = fa.contains_key(Path::new("manifest.json"));
    let differing: Vec<_> = fa
        .keys()
        .chain(fb.keys())
        .filter(|k| fa.get(*k) != fb.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    check(
        has_manifest && differing.is_empty(),
        format!("{} files compared, differing {differing:?}", fa.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("metric-oracle-equivalence", metric_oracle),
        ("published-rmse-consistency", published_rmse_consistency),
        ("pearson-property-suite", pearson_properties),
        ("augmentation-property-suite", augmentation_properties),
        ("split-contract", split_contract),
        ("stats-reproduction", stats_reproduction),
        ("baseline-sanity", baseline_sanity),
        ("end-to-end-determinism", end_to_end_determinism),
    ];
    let mut unexpected = 0;
    for (name, run) in criteria {
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status} {name}: {}", outcome.detail);
        if !outcome.passed {
            match KNOWN_UNATTAINABLE.iter().find(|(n, _)| *n == name) {
                Some((_, why)) => println!("     known unattainable: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criterion/criteria failed unexpectedly");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
