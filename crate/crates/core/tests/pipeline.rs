use intimacy_core::augment::{
    eda_augment, with_augmented, AugmentConfig, AugmentOp, StopwordList, SynonymLexicon,
};
use intimacy_core::baseline::{self, FeatureHasher, GdParams, Optimizer, RidgeModel};
use intimacy_core::corpus::{load_dataset, stratified_split, write_dataset, DataFormat, SplitSpec};
use intimacy_core::report::{
    compare_ablation, evaluate_predictions, AblationRow, PredictionsFile, References,
};
use intimacy_core::stats::{corpus_report, export_stats, read_stats, StatsFormat};
use intimacy_core::synth::{mint_like, planted_corpus, MintSplit};
use intimacy_core::Language;

fn small_hasher() -> FeatureHasher {
    FeatureHasher {
        dim: 1 << 12,
        ..FeatureHasher::default()
    }
}

#[test]
fn csv_and_tsv_round_trip_keep_ids_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = mint_like(MintSplit::Test, 3);
    let split = stratified_split(&corpus, &SplitSpec::default()).unwrap();
    for (name, format) in [("t.csv", DataFormat::Csv), ("t.tsv", DataFormat::Tsv)] {
        let path = dir.path().join(name);
        // the test part has non-contiguous ids, so an id column is written
        write_dataset(&split.test, &path, format).unwrap();
        let back = load_dataset(&path, format).unwrap();
        assert_eq!(back.tweets(), split.test.tweets());
    }
}

#[test]
fn split_augment_fit_evaluate() {
    let corpus = planted_corpus(800, 21, 0.1);
    let split = stratified_split(&corpus, &SplitSpec::default()).unwrap();

    let mut stop = StopwordList::new();
    stop.insert(Language::English, "the");
    let config = AugmentConfig {
        enabled_ops: vec![AugmentOp::RandomSwap, AugmentOp::RandomDeletion],
        ..AugmentConfig::default()
    };
    let aug = eda_augment(&split.train, &config, &SynonymLexicon::new(), &stop).unwrap();
    assert!(!aug.examples.is_empty());
    let augmented = with_augmented(&split.train, &aug.examples).unwrap();
    assert_eq!(augmented.len(), split.train.len() + aug.examples.len());

    let mut rows = Vec::new();
    for (flag, train) in [(false, &split.train), (true, &augmented)] {
        let model = baseline::fit(
            train,
            &small_hasher(),
            1e-2,
            Optimizer::ClosedForm,
            &GdParams::default(),
        )
        .unwrap();
        let preds = baseline::predict(&model, &split.test);
        let file = PredictionsFile::new(
            split.test.iter().map(|t| t.id).zip(preds).collect(),
            "ridge",
            flag,
        )
        .unwrap();
        let eval = evaluate_predictions(&split.test, &file, &References::default()).unwrap();
        assert!(eval.overall.pearson.unwrap() > 0.8, "{:?}", eval.overall);
        assert_eq!(eval.per_language.len(), 1);
        rows.push(AblationRow {
            model_tag: "ridge".into(),
            augmented: flag,
            report: eval.overall,
        });
    }
    let table = compare_ablation(&rows).unwrap();
    assert_eq!(table.groups.len(), 1);
    assert!(table.groups[0].delta_pearson.is_some());
}

#[test]
fn saved_model_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = planted_corpus(200, 4, 0.1);
    let params = GdParams {
        epochs: 50,
        ..GdParams::default()
    };
    let model = baseline::fit(
        &corpus,
        &small_hasher(),
        0.1,
        Optimizer::GradientDescent,
        &params,
    )
    .unwrap();
    let path = dir.path().join("m.json");
    model.save(&path).unwrap();
    let loaded = RidgeModel::load(&path).unwrap();
    assert_eq!(
        baseline::predict(&loaded, &corpus),
        baseline::predict(&model, &corpus)
    );
}

#[test]
fn stats_export_round_trips_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let report = corpus_report(&mint_like(MintSplit::Train, 8), "train").unwrap();
    assert_eq!(report.overall.count, 9491);
    assert_eq!(report.per_language.len(), 6);
    for (name, format) in [("s.json", StatsFormat::Json), ("s.tsv", StatsFormat::Tsv)] {
        let path = dir.path().join(name);
        export_stats(&report, &path, format).unwrap();
        assert_eq!(read_stats(&path, format).unwrap(), report);
    }
}

#[test]
fn evaluation_rejects_mismatched_ids() {
    let corpus = planted_corpus(30, 1, 0.1);
    let rows = corpus.iter().skip(1).map(|t| (t.id + 100, 3.0)).collect();
    let file = PredictionsFile::new(rows, "x", false).unwrap();
    let err = evaluate_predictions(&corpus, &file, &References::default()).unwrap_err();
    let msg = err.to_string();
    assert!(
        msg.contains("without prediction") && msg.contains("(+20 more)"),
        "{msg}"
    );
}
