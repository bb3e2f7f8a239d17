//! `run-all`: stats, split, augment, train with and without augmentation,
//! predict, evaluate and report, all under the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use intimacy_core::augment::{eda_augment, with_augmented, write_augmented};
use intimacy_core::corpus::{stratified_split, write_dataset, DataFormat};
use intimacy_core::report::{
    compare_ablation, emit_plot_data, evaluate_predictions, render_language_table, AblationRow,
    Evaluation, References,
};
use intimacy_core::stats::{corpus_report, export_stats, StatsFormat};
use intimacy_core::Corpus;
use serde::Serialize;

use crate::commands::{
    check_defined, fit_selected, load_augment_resources, load_corpus, predictions_for, require,
    write_json, write_text, LambdaTrial,
};
use crate::config::ExperimentConfig;
use crate::manifest::write_manifest;

pub const MODEL_TAG: &str = "ridge";

/// Records files written relative to the output directory.
struct Outputs {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn path(&mut self, rel: impl AsRef<Path>) -> Result<PathBuf> {
        let rel = rel.as_ref().to_path_buf();
        let full = self.root.join(&rel);
        crate::commands::create_parent(&full)?;
        self.written.push(rel);
        Ok(full)
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let p = self.path(rel)?;
        write_json(value, &p)
    }

    fn text(&mut self, rel: &str, body: &str) -> Result<()> {
        let p = self.path(rel)?;
        write_text(body, &p)
    }
}

#[derive(Serialize)]
struct Selection {
    variant: &'static str,
    chosen_lambda: f64,
    trials: Vec<LambdaTrial>,
}

fn stats_and_plots(out: &mut Outputs, corpus: &Corpus, name: &str) -> Result<()> {
    let report = corpus_report(corpus, name)?;
    let p = out.path(format!("stats/{name}.json"))?;
    export_stats(&report, &p, StatsFormat::Json)?;
    let plot_dir = PathBuf::from("report/plots").join(name);
    fs::create_dir_all(out.root.join(&plot_dir))?;
    for file in emit_plot_data(&report, out.root.join(&plot_dir))? {
        out.written.push(plot_dir.join(file));
    }
    Ok(())
}

fn score(
    out: &mut Outputs,
    model: &intimacy_core::baseline::RidgeModel,
    gold: &Corpus,
    refs: &References,
    name: &str,
    augmented: bool,
) -> Result<Evaluation> {
    let preds = predictions_for(model, gold, MODEL_TAG, augmented)?;
    let p = out.path(format!("predictions/{name}.tsv"))?;
    preds.write(&p)?;
    let eval =
        evaluate_predictions(gold, &preds, refs).with_context(|| format!("evaluating {name}"))?;
    out.json(&format!("evaluate/{name}.json"), &eval)?;
    out.text(
        &format!("evaluate/{name}.txt"),
        &render_language_table(&eval, refs),
    )?;
    Ok(eval)
}

pub fn run_all(config: &ExperimentConfig) -> Result<()> {
    config.validate()?;
    let train_path = require(config.paths.train.clone(), "paths.train")?;
    let corpus = load_corpus(&train_path)?;
    let final_test = config.paths.test.as_deref().map(load_corpus).transpose()?;
    let refs = match &config.paths.references {
        Some(p) => References::read(p)?,
        None => References::default(),
    };
    let mut out = Outputs {
        root: config.paths.output_dir.clone(),
        written: Vec::new(),
    };
    fs::create_dir_all(&out.root).with_context(|| format!("creating {}", out.root.display()))?;

    log::info!("stats");
    stats_and_plots(&mut out, &corpus, "train")?;
    if let Some(test) = &final_test {
        stats_and_plots(&mut out, test, "test")?;
    }

    log::info!("split");
    let split = stratified_split(&corpus, &config.split_spec())?;
    for part in [&split.train, &split.validation, &split.test] {
        let p = out.path(format!("split/{}.csv", part.name.as_str()))?;
        write_dataset(part, &p, DataFormat::Csv)?;
    }

    log::info!("augment");
    let (lexicon, stopwords) = load_augment_resources(config)?;
    let aug = eda_augment(&split.train, &config.augment_config(), &lexicon, &stopwords)?;
    let p = out.path("augment/augmented.csv")?;
    write_augmented(&aug.examples, &p, DataFormat::Csv)?;
    let augmented_train = with_augmented(&split.train, &aug.examples)?;

    let final_scored = final_test.filter(|t| t.iter().all(|tw| tw.score.is_some()));
    let mut selections = Vec::new();
    let mut ablation = Vec::new();
    let mut evaluations = Vec::new();
    for (variant, augmented, train) in [
        ("plain", false, &split.train),
        ("augmented", true, &augmented_train),
    ] {
        log::info!("train {variant} on {} tweets", train.len());
        let (model, trials) = fit_selected(config, train, Some(&split.validation))?;
        let p = out.path(format!("models/{variant}.json"))?;
        model.save(&p)?;
        selections.push(Selection {
            variant,
            chosen_lambda: model.lambda,
            trials,
        });

        let dev = score(
            &mut out,
            &model,
            &split.test,
            &refs,
            &format!("{variant}_dev"),
            augmented,
        )?;
        let reported = match &final_scored {
            Some(test) => {
                evaluations.push(dev);
                score(
                    &mut out,
                    &model,
                    test,
                    &refs,
                    &format!("{variant}_final"),
                    augmented,
                )?
            }
            None => dev,
        };
        ablation.push(AblationRow {
            model_tag: MODEL_TAG.into(),
            augmented,
            report: reported.overall.clone(),
        });
        evaluations.push(reported);
    }
    out.json("models/selection.json", &selections)?;

    let table = compare_ablation(&ablation)?;
    out.text("report/ablation.txt", &table.render())?;
    out.text("report/ablation.tsv", &table.to_tsv())?;
    out.json("report/ablation.json", &table)?;

    let manifest = write_manifest(config, &out.written)?;
    print!("{}", table.render());
    println!(
        "{} output files under {} (config {})",
        manifest.outputs.len(),
        out.root.display(),
        &manifest.config_hash[..12]
    );
    for eval in &evaluations {
        check_defined(eval)?;
    }
    Ok(())
}
