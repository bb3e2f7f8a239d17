//! One function per subcommand. Each resolves its inputs from flags first
//! and the experiment config second, then calls into the core library.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use intimacy_core::augment::{eda_augment, write_augmented, StopwordList, SynonymLexicon};
use intimacy_core::baseline::{self, RidgeModel};
use intimacy_core::corpus::{load_dataset, stratified_split, write_dataset, DataFormat, SplitName};
use intimacy_core::metrics::{self, MetricsError, PairedSeries};
use intimacy_core::report::{
    compare_ablation, emit_plot_data, evaluate_predictions, render_language_table, AblationRow,
    Evaluation, PredictionsFile, References,
};
use intimacy_core::stats::{corpus_report, export_stats, read_stats, StatsFormat};
use intimacy_core::synth::{mint_like, planted_corpus, MintSplit};
use intimacy_core::{Corpus, Tweet};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig};
use crate::{
    AugmentArgs, EvaluateArgs, PredictArgs, ReportArgs, SplitArgs, StatsArgs, SynthArgs,
    SynthSplit, TrainArgs,
};

pub fn require(path: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.ok_or_else(|| ConfigError(format!("no {what} given (flag or config)")).into())
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    Ok(load_dataset(path, DataFormat::from_path(path))?)
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    create_parent(path)?;
    let body = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(body: &str, path: &Path) -> Result<()> {
    create_parent(path)?;
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn load_lexicon(path: Option<&Path>) -> Result<SynonymLexicon> {
    Ok(match path {
        Some(p) => SynonymLexicon::load(p)?,
        None => SynonymLexicon::new(),
    })
}

fn load_stopwords(dir: Option<&Path>) -> Result<StopwordList> {
    Ok(match dir {
        Some(d) => StopwordList::load_dir(d)?,
        None => StopwordList::new(),
    })
}

pub fn load_augment_resources(config: &ExperimentConfig) -> Result<(SynonymLexicon, StopwordList)> {
    Ok((
        load_lexicon(config.paths.lexicon.as_deref())?,
        load_stopwords(config.paths.stopwords.as_deref())?,
    ))
}

/// Appends tweets from `extra` to `base`, renumbering them after the
/// largest id of `base`.
pub fn append_corpus(base: &Corpus, extra: &Corpus) -> Result<Corpus> {
    let next = base.iter().map(|t| t.id + 1).max().unwrap_or(0);
    let mut tweets = base.tweets().to_vec();
    for (i, t) in extra.iter().enumerate() {
        tweets.push(Tweet::new(
            next + i as u64,
            t.text.clone(),
            t.language,
            t.score,
        )?);
    }
    Ok(Corpus::new(
        tweets,
        format!("{} + {}", base.source, extra.source),
        SplitName::Train,
    )?)
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaTrial {
    pub lambda: f64,
    pub validation_pearson: Option<f64>,
}

/// Fits one model per lambda candidate and keeps the one with the highest
/// validation Pearson (earliest candidate on ties, undefined Pearson
/// ranks last). Without a validation corpus the first candidate is fitted.
pub fn fit_selected(
    config: &ExperimentConfig,
    train: &Corpus,
    validation: Option<&Corpus>,
) -> Result<(RidgeModel, Vec<LambdaTrial>)> {
    let hasher = config.hasher();
    let gd = config.gd_params();
    let optimizer = config.baseline.optimizer;
    let Some(validation) = validation else {
        let lambda = config.baseline.lambdas[0];
        let model = baseline::fit(train, &hasher, lambda, optimizer, &gd)?;
        return Ok((
            model,
            vec![LambdaTrial {
                lambda,
                validation_pearson: None,
            }],
        ));
    };
    let gold = validation.scores()?;
    let mut best: Option<(RidgeModel, f64)> = None;
    let mut trials = Vec::new();
    for &lambda in &config.baseline.lambdas {
        let model = baseline::fit(train, &hasher, lambda, optimizer, &gd)?;
        let preds = baseline::predict(&model, validation);
        let pearson = metrics::pearson(&PairedSeries::new(gold.clone(), preds)?).ok();
        log::info!("lambda {lambda}: validation pearson {pearson:?}");
        trials.push(LambdaTrial {
            lambda,
            validation_pearson: pearson,
        });
        let score = pearson.unwrap_or(f64::NEG_INFINITY);
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((model, score));
        }
    }
    let (model, _) = best.expect("at least one lambda");
    Ok((model, trials))
}

pub fn predictions_for(
    model: &RidgeModel,
    corpus: &Corpus,
    tag: &str,
    augmented: bool,
) -> Result<PredictionsFile> {
    let preds = baseline::predict(model, corpus);
    let rows = corpus.iter().map(|t| t.id).zip(preds).collect();
    Ok(PredictionsFile::new(rows, tag, augmented)?)
}

/// Fails with a numeric error when the overall Pearson is undefined.
pub fn check_defined(eval: &Evaluation) -> Result<()> {
    if eval.overall.pearson.is_none() {
        return Err(
            anyhow::Error::new(MetricsError::UndefinedCorrelation("gold or predicted"))
                .context(format!("evaluating {}", eval.model_tag)),
        );
    }
    Ok(())
}

pub fn stats(config: ExperimentConfig, args: StatsArgs) -> Result<()> {
    config.validate()?;
    let input = require(args.input.or(config.paths.train.clone()), "input corpus")?;
    let corpus = load_corpus(&input)?;
    let report = corpus_report(&corpus, &args.split_name)?;
    let out = args.out.unwrap_or_else(|| {
        config
            .paths
            .output_dir
            .join("stats")
            .join(format!("{}.json", args.split_name))
    });
    create_parent(&out)?;
    export_stats(&report, &out, StatsFormat::from_path(&out))?;
    println!(
        "{} tweets, {} languages -> {}",
        report.overall.count,
        report.per_language.len(),
        out.display()
    );
    Ok(())
}

pub fn split(mut config: ExperimentConfig, args: SplitArgs) -> Result<()> {
    if let Some(r) = args.ratios {
        config.split.ratios = [r[0], r[1], r[2]];
    }
    if let Some(s) = args.stratify_by {
        config.split.stratify_by = s.into();
    }
    config.validate()?;
    let input = require(args.input.or(config.paths.train.clone()), "input corpus")?;
    let corpus = load_corpus(&input)?;
    let split = stratified_split(&corpus, &config.split_spec())?;
    let dir = config.paths.output_dir.join("split");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let format = DataFormat::from_path(&input);
    let ext = if format == DataFormat::Tsv {
        "tsv"
    } else {
        "csv"
    };
    for part in [&split.train, &split.validation, &split.test] {
        let path = dir.join(format!("{}.{ext}", part.name.as_str()));
        write_dataset(part, &path, format)?;
        println!("{}\t{}\t{}", part.name.as_str(), part.len(), path.display());
    }
    Ok(())
}

pub fn augment(mut config: ExperimentConfig, args: AugmentArgs) -> Result<()> {
    if args.lexicon.is_some() {
        config.paths.lexicon = args.lexicon;
    }
    if args.stopwords.is_some() {
        config.paths.stopwords = args.stopwords;
    }
    if let Some(ops) = args.ops {
        config.augment.enabled_ops = ops;
    }
    if let Some(n) = args.n_aug {
        config.augment.n_aug = n;
    }
    if let Some(a) = args.alpha {
        let s = &mut config.augment;
        (s.alpha_sr, s.alpha_ri, s.alpha_rs, s.p_rd) = (a, a, a, a);
    }
    config.validate()?;
    let input = require(args.input.or(config.paths.train.clone()), "input corpus")?;
    let corpus = load_corpus(&input)?;
    let (lexicon, stopwords) = load_augment_resources(&config)?;
    let aug = eda_augment(&corpus, &config.augment_config(), &lexicon, &stopwords)?;
    let out = args.out.unwrap_or_else(|| {
        config
            .paths
            .output_dir
            .join("augment")
            .join("augmented.csv")
    });
    create_parent(&out)?;
    write_augmented(&aug.examples, &out, DataFormat::from_path(&out))?;
    println!(
        "{} augmented examples -> {}",
        aug.examples.len(),
        out.display()
    );
    Ok(())
}

pub fn train(mut config: ExperimentConfig, args: TrainArgs) -> Result<()> {
    if let Some(l) = args.lambda {
        config.baseline.lambdas = l;
    }
    if let Some(o) = args.optimizer {
        config.baseline.optimizer = o.into();
    }
    config.validate()?;
    let input = require(args.input.or(config.paths.train.clone()), "training corpus")?;
    let mut corpus = load_corpus(&input)?;
    if let Some(aug) = &args.augmented {
        corpus = append_corpus(&corpus, &load_corpus(aug)?)?;
    }
    let validation = args.validation.as_deref().map(load_corpus).transpose()?;
    let (model, trials) = fit_selected(&config, &corpus, validation.as_ref())?;
    let out = args
        .out
        .unwrap_or_else(|| config.paths.output_dir.join("models").join("ridge.json"));
    create_parent(&out)?;
    model.save(&out)?;
    for t in &trials {
        let p = t
            .validation_pearson
            .map_or("-".to_string(), |p| format!("{p:.4}"));
        println!("lambda={}\tvalidation_pearson={p}", t.lambda);
    }
    println!("model (lambda={}) -> {}", model.lambda, out.display());
    Ok(())
}

pub fn predict(config: ExperimentConfig, args: PredictArgs) -> Result<()> {
    config.validate()?;
    let model = RidgeModel::load(&args.model)?;
    let corpus = load_corpus(&args.input)?;
    let file = predictions_for(&model, &corpus, &args.model_tag, args.augmented)?;
    let out = args.out.unwrap_or_else(|| {
        config
            .paths
            .output_dir
            .join("predictions")
            .join(format!("{}.tsv", args.model_tag))
    });
    create_parent(&out)?;
    file.write(&out)?;
    println!("{} predictions -> {}", file.rows.len(), out.display());
    Ok(())
}

pub fn evaluate(config: ExperimentConfig, args: EvaluateArgs) -> Result<()> {
    config.validate()?;
    let gold = load_corpus(&args.gold)?;
    let preds = PredictionsFile::read(&args.predictions)?;
    let refs = match args.references.or(config.paths.references.clone()) {
        Some(p) => References::read(p)?,
        None => References::default(),
    };
    let eval = evaluate_predictions(&gold, &preds, &refs).with_context(|| {
        format!(
            "scoring {} against {}",
            args.predictions.display(),
            args.gold.display()
        )
    })?;
    let out = args.out.unwrap_or_else(|| {
        let stem = args
            .predictions
            .file_stem()
            .map_or("predictions".into(), |s| s.to_string_lossy());
        config
            .paths
            .output_dir
            .join("evaluate")
            .join(format!("{stem}.json"))
    });
    write_json(&eval, &out)?;
    print!("{}", render_language_table(&eval, &refs));
    let o = &eval.overall;
    println!(
        "mse={:.4} rmse={:.4} mae={:.4} n={}",
        o.mse, o.rmse, o.mae, o.n
    );
    check_defined(&eval)
}

pub fn report(config: ExperimentConfig, args: ReportArgs) -> Result<()> {
    config.validate()?;
    if args.evaluations.is_empty() && args.stats.is_none() {
        return Err(ConfigError("report needs --evaluations and/or --stats".into()).into());
    }
    let dir = args
        .out
        .unwrap_or_else(|| config.paths.output_dir.join("report"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    if !args.evaluations.is_empty() {
        let mut rows = Vec::new();
        for path in &args.evaluations {
            let body =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let eval: Evaluation = serde_json::from_str(&body)
                .map_err(|e| intimacy_core::Error::format(path, e.to_string()))?;
            rows.push(AblationRow {
                model_tag: eval.model_tag,
                augmented: eval.augmented,
                report: eval.overall,
            });
        }
        let table = compare_ablation(&rows)?;
        write_text(&table.render(), &dir.join("ablation.txt"))?;
        write_text(&table.to_tsv(), &dir.join("ablation.tsv"))?;
        write_json(&table, &dir.join("ablation.json"))?;
        print!("{}", table.render());
    }
    if let Some(stats_path) = &args.stats {
        let stats = read_stats(stats_path, StatsFormat::from_path(stats_path))?;
        let plots = dir.join("plots");
        fs::create_dir_all(&plots).with_context(|| format!("creating {}", plots.display()))?;
        for name in emit_plot_data(&stats, &plots)? {
            println!("{}", plots.join(name).display());
        }
    }
    Ok(())
}

pub fn synth(config: ExperimentConfig, args: SynthArgs) -> Result<()> {
    let corpus = match args.split {
        SynthSplit::Train => mint_like(MintSplit::Train, config.seed),
        SynthSplit::Test => mint_like(MintSplit::Test, config.seed),
        SynthSplit::Planted => planted_corpus(2500, config.seed, 0.1),
    };
    create_parent(&args.out)?;
    write_dataset(&corpus, &args.out, DataFormat::from_path(&args.out))?;
    println!("{} tweets -> {}", corpus.len(), args.out.display());
    Ok(())
}
