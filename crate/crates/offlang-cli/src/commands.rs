//! One function per subcommand, plus the train-config resolution logic
//! (defaults, then config file, then flags).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde_json::json;

use offlang_core::corpus::{label_stats, undersample_balance, validate_hierarchy, Corpus};
use offlang_core::evalviz::{ensemble_predict, evaluate, majority_baseline, pca_project};
use offlang_core::model::{CheckpointMeta, DropoutMode, ModelParams};
use offlang_core::pairs::{build_pools, sample_pairs};
use offlang_core::preprocess::{normalize_corpus, NormalizationConfig, Stage};
use offlang_core::train::{
    train_classifier, train_contrastive, train_frozen_probe, train_multitask, ContrastiveData,
    TrainHistory,
};
use offlang_core::{EncoderConfig, LossKind, Metrics, Task, TrainConfig};

use crate::args::{
    BalanceArgs, BaselineArgs, EnsembleArgs, EvalArgs, ObjectiveArg, PairsArgs, PreprocessArgs,
    ProjectArgs, StatsArgs, TrainArgs, ValidateArgs,
};
use crate::io;
use crate::manifest::Manifest;
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn preprocess(args: &PreprocessArgs) -> Result<(), CliError> {
    let config = match &args.stages {
        Some(list) => NormalizationConfig::from_stage_names(list, args.max_run)
            .map_err(|e| usage(e.to_string()))?,
        None => NormalizationConfig::new(Stage::DEFAULT_ORDER.to_vec(), args.max_run)
            .map_err(|e| usage(e.to_string()))?,
    };
    let corpus = io::load_corpus(&args.input, !args.no_header)?;
    let normalized = normalize_corpus(&corpus, &config);
    io::save_corpus(&args.out, &normalized)?;
    let stage_names: Vec<String> = config
        .stages()
        .iter()
        .map(|s| s.name().to_string())
        .collect();
    let mut manifest = Manifest::new("preprocess");
    manifest
        .input(&args.input)
        .output(&args.out)
        .set("stages", stage_names.join(","))
        .set("max_run", config.max_run() as u64)
        .set("records", normalized.len() as u64);
    manifest.write()?;
    eprintln!(
        "normalized {} records -> {}",
        normalized.len(),
        args.out.display()
    );
    Ok(())
}

pub fn stats(args: &StatsArgs) -> Result<(), CliError> {
    let corpus = io::load_corpus(&args.input, !args.no_header)?;
    let report =
        label_stats(&corpus, args.task.to_task()).map_err(|e| CliError::Data(e.to_string()))?;
    let doc = io::distribution_json(&report);
    io::emit_json(args.out.as_deref(), &doc)?;
    if let Some(out) = &args.out {
        let mut manifest = Manifest::new("stats");
        manifest
            .input(&args.input)
            .output(out)
            .set("task", args.task.to_task().name());
        manifest.write()?;
    }
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let corpus = io::load_corpus(&args.input, !args.no_header)?;
    let violations = validate_hierarchy(&corpus);
    let doc = io::violations_json(&violations);
    io::emit_json(args.out.as_deref(), &doc)?;
    if let Some(out) = &args.out {
        let mut manifest = Manifest::new("validate");
        manifest.input(&args.input).output(out);
        manifest.write()?;
    }
    Ok(())
}

pub fn balance(args: &BalanceArgs, seed: Option<u64>) -> Result<(), CliError> {
    let task = args.task.to_task();
    if task == Task::C {
        return Err(usage("balance supports tasks A and B"));
    }
    if !task.labels().contains(&args.positive.as_str()) {
        return Err(usage(format!(
            "--positive {:?} is not a task-{} label (expected one of {:?})",
            args.positive,
            task.name(),
            task.labels()
        )));
    }
    let seed = seed.unwrap_or(0);
    let primary = io::load_corpus(&args.input, !args.no_header)?;
    let extras: Vec<Corpus> = args
        .extras
        .iter()
        .map(|p| io::load_corpus(p, !args.no_header))
        .collect::<Result<_, _>>()?;
    let extra_refs: Vec<&Corpus> = extras.iter().collect();
    let balanced = undersample_balance(&primary, &extra_refs, task, &args.positive, seed)
        .map_err(|e| CliError::Data(e.to_string()))?;
    io::save_corpus(&args.out, &balanced)?;
    let mut manifest = Manifest::new("balance");
    manifest.input(&args.input);
    for extra in &args.extras {
        manifest.input(extra);
    }
    manifest
        .output(&args.out)
        .seed(seed)
        .set("task", task.name())
        .set("positive", args.positive.clone())
        .set("records", balanced.len() as u64);
    manifest.write()?;
    eprintln!(
        "balanced corpus of {} records -> {}",
        balanced.len(),
        args.out.display()
    );
    Ok(())
}

pub fn pairs(args: &PairsArgs, seed: Option<u64>) -> Result<(), CliError> {
    let size = match (args.size, args.size_preset) {
        (Some(n), None) => n,
        (None, Some(preset)) => preset.pairs(),
        (None, None) => return Err(usage("one of --size or --size-preset is required")),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let seed = seed.unwrap_or(0);
    let corpus = io::load_corpus(&args.input, !args.no_header)?;
    let pools = build_pools(&corpus).map_err(|e| CliError::Data(e.to_string()))?;
    let dataset = sample_pairs(&pools, size, seed).map_err(|e| CliError::Data(e.to_string()))?;
    io::save_pairs(&args.out, &dataset)?;
    let mut manifest = Manifest::new("pairs");
    manifest
        .input(&args.input)
        .output(&args.out)
        .seed(seed)
        .set("size", size)
        .set("off_count", pools.off_count() as u64)
        .set("not_off_count", pools.not_off_count() as u64);
    manifest.write()?;
    eprintln!(
        "sampled {} pairs -> {}",
        dataset.pairs.len(),
        args.out.display()
    );
    Ok(())
}

fn kv_get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Data(format!("config key {key}: cannot parse {raw:?}"))),
    }
}

const TRAIN_KEYS: [&str; 12] = [
    "learning_rate",
    "max_epochs",
    "patience",
    "batch_size",
    "seed",
    "objective",
    "margin",
    "triplet_epsilon",
    "average_all_triplets",
    "mtl_weight_a",
    "mtl_weight_b",
    "mtl_weight_c",
];

const ENCODER_KEYS: [&str; 7] = [
    "hash_buckets",
    "ngram_min",
    "ngram_max",
    "embed_dim",
    "out_dim",
    "dropout_p",
    "seed",
];

fn resolve_train_config(
    args: &TrainArgs,
    global_seed: Option<u64>,
) -> Result<(TrainConfig, ObjectiveArg), CliError> {
    let file = match &args.config {
        Some(path) => io::load_kv(path)?,
        None => BTreeMap::new(),
    };
    for key in file.keys() {
        if !TRAIN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Data(format!(
                "unknown training config key {key:?}"
            )));
        }
    }
    let objective = match args.objective {
        Some(o) => o,
        None => match file.get("objective") {
            Some(raw) => match LossKind::parse(raw) {
                Some(LossKind::CrossEntropy) => ObjectiveArg::Ce,
                Some(LossKind::Contrastive) => ObjectiveArg::Contrastive,
                Some(LossKind::OnlineContrastive) => ObjectiveArg::OnlineContrastive,
                Some(LossKind::BatchAllTriplet) => ObjectiveArg::BatchAll,
                None if raw == "multitask" => ObjectiveArg::Multitask,
                None => {
                    return Err(CliError::Data(format!(
                        "unknown objective {raw:?} in config"
                    )))
                }
            },
            None => ObjectiveArg::Ce,
        },
    };
    let mut config = if objective == ObjectiveArg::Multitask {
        TrainConfig::multitask_default()
    } else {
        TrainConfig::default()
    };
    config.loss.kind = match objective {
        ObjectiveArg::Ce | ObjectiveArg::Multitask => LossKind::CrossEntropy,
        ObjectiveArg::Contrastive => LossKind::Contrastive,
        ObjectiveArg::OnlineContrastive => LossKind::OnlineContrastive,
        ObjectiveArg::BatchAll => LossKind::BatchAllTriplet,
    };

    if let Some(v) = kv_get(&file, "learning_rate")? {
        config.learning_rate = v;
    }
    if let Some(v) = kv_get(&file, "max_epochs")? {
        config.max_epochs = v;
    }
    if let Some(v) = kv_get(&file, "patience")? {
        config.patience = v;
    }
    if let Some(v) = kv_get(&file, "batch_size")? {
        config.batch_size = v;
    }
    if let Some(v) = kv_get(&file, "seed")? {
        config.seed = v;
    }
    if let Some(v) = kv_get(&file, "margin")? {
        config.loss.margin = v;
    }
    if let Some(v) = kv_get(&file, "triplet_epsilon")? {
        config.loss.triplet_epsilon = v;
    }
    if let Some(v) = kv_get(&file, "average_all_triplets")? {
        config.loss.average_all_triplets = v;
    }
    for (slot, key) in ["mtl_weight_a", "mtl_weight_b", "mtl_weight_c"]
        .iter()
        .enumerate()
    {
        if let Some(v) = kv_get(&file, key)? {
            config.mtl_task_weights[slot] = v;
        }
    }

    // flags override file values
    if let Some(v) = args.lr {
        config.learning_rate = v;
    }
    if let Some(v) = args.max_epochs {
        config.max_epochs = v;
        config.patience = config.patience.min(v);
    }
    if let Some(v) = args.patience {
        config.patience = v;
    }
    if let Some(v) = args.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = args.margin {
        config.loss.margin = v;
    }
    if let Some(v) = global_seed {
        config.seed = v;
    }
    Ok((config, objective))
}

fn resolve_encoder_config(args: &TrainArgs) -> Result<EncoderConfig, CliError> {
    let mut config = EncoderConfig::default();
    if let Some(path) = &args.encoder_config {
        let file = io::load_kv(path)?;
        for key in file.keys() {
            if !ENCODER_KEYS.contains(&key.as_str()) {
                return Err(CliError::Data(format!(
                    "unknown encoder config key {key:?}"
                )));
            }
        }
        if let Some(v) = kv_get(&file, "hash_buckets")? {
            config.hash_buckets = v;
        }
        if let Some(v) = kv_get(&file, "ngram_min")? {
            config.ngram_min = v;
        }
        if let Some(v) = kv_get(&file, "ngram_max")? {
            config.ngram_max = v;
        }
        if let Some(v) = kv_get(&file, "embed_dim")? {
            config.embed_dim = v;
        }
        if let Some(v) = kv_get(&file, "out_dim")? {
            config.out_dim = v;
        }
        if let Some(v) = kv_get(&file, "dropout_p")? {
            config.dropout_p = v;
        }
        if let Some(v) = kv_get(&file, "seed")? {
            config.seed = v;
        }
    }
    Ok(config)
}

fn log_history(history: &TrainHistory) {
    for e in &history.epochs {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        eprintln!(
            "epoch {:>3}  loss {:<12.6} dev A {} B {} C {}  skipped {}",
            e.epoch,
            e.train_loss,
            fmt(e.dev_f1.a),
            fmt(e.dev_f1.b),
            fmt(e.dev_f1.c),
            e.skipped_batches
        );
    }
    eprintln!(
        "best epoch {} of {}{}",
        history.best_epoch,
        history.epochs.len(),
        if history.stopped_early {
            " (early stop)"
        } else {
            ""
        }
    );
}

pub fn train(args: &TrainArgs, global_seed: Option<u64>) -> Result<(), CliError> {
    let (config, objective) = resolve_train_config(args, global_seed)?;
    let encoder_config = resolve_encoder_config(args)?;
    if let Err(e) = config.validate() {
        return Err(usage(e.to_string()));
    }

    // shape checks first: objective/data mismatches are usage errors
    let need_task = args.probe || matches!(objective, ObjectiveArg::Ce);
    if args.probe && objective != ObjectiveArg::Ce {
        return Err(usage(
            "--probe trains a linear head with cross-entropy; drop --objective",
        ));
    }
    if args.probe && args.encoder.is_none() {
        return Err(usage("--probe requires --encoder <checkpoint>"));
    }
    if !args.probe && args.encoder.is_some() {
        return Err(usage("--encoder only applies to --probe runs"));
    }
    match objective {
        ObjectiveArg::Ce | ObjectiveArg::BatchAll | ObjectiveArg::Multitask => {
            if args.train.is_none() {
                return Err(usage(format!(
                    "--objective {} trains on a labeled corpus: --train is required",
                    objective_name(objective)
                )));
            }
            if args.pairs.is_some() {
                return Err(usage(format!(
                    "--objective {} uses labeled single texts, not a pair file",
                    objective_name(objective)
                )));
            }
        }
        ObjectiveArg::Contrastive | ObjectiveArg::OnlineContrastive => {
            if args.pairs.is_none() {
                return Err(usage(format!(
                    "--objective {} trains on pairs: --pairs is required",
                    objective_name(objective)
                )));
            }
            if args.train.is_some() {
                return Err(usage(format!(
                    "--objective {} uses a pair file, not a labeled corpus",
                    objective_name(objective)
                )));
            }
        }
    }
    if need_task && args.task.is_none() {
        return Err(usage("--task is required for this mode"));
    }
    if !need_task && args.task.is_some() {
        return Err(usage(
            "--task does not apply: contrastive and multitask modes fix the tasks",
        ));
    }

    let dev = io::load_corpus(&args.dev, !args.no_header)?;
    let data_err = |e: offlang_core::train::TrainError| CliError::Data(e.to_string());

    let (params, history) = if args.probe {
        let encoder_path = args.encoder.as_ref().expect("checked above");
        let checkpoint = io::load_checkpoint(encoder_path)?;
        let train_corpus =
            io::load_corpus(args.train.as_ref().expect("checked above"), !args.no_header)?;
        let task = args.task.expect("checked above").to_task();
        train_frozen_probe(&checkpoint.params, &train_corpus, &dev, task, &config)
            .map_err(data_err)?
    } else {
        match objective {
            ObjectiveArg::Ce => {
                let train_corpus =
                    io::load_corpus(args.train.as_ref().expect("checked above"), !args.no_header)?;
                let task = args.task.expect("checked above").to_task();
                if task == Task::C {
                    return Err(usage("classification fine-tuning covers tasks A and B"));
                }
                train_classifier(&train_corpus, &dev, task, &encoder_config, &config)
                    .map_err(data_err)?
            }
            ObjectiveArg::BatchAll => {
                let train_corpus =
                    io::load_corpus(args.train.as_ref().expect("checked above"), !args.no_header)?;
                train_contrastive(
                    ContrastiveData::Corpus(&train_corpus),
                    &dev,
                    &encoder_config,
                    &config,
                )
                .map_err(data_err)?
            }
            ObjectiveArg::Contrastive | ObjectiveArg::OnlineContrastive => {
                let dataset = io::load_pairs(args.pairs.as_ref().expect("checked above"))?;
                train_contrastive(
                    ContrastiveData::Pairs(&dataset),
                    &dev,
                    &encoder_config,
                    &config,
                )
                .map_err(data_err)?
            }
            ObjectiveArg::Multitask => {
                let train_corpus =
                    io::load_corpus(args.train.as_ref().expect("checked above"), !args.no_header)?;
                train_multitask(&train_corpus, &dev, &encoder_config, &config).map_err(data_err)?
            }
        }
    };

    log_history(&history);
    let best = &history.epochs[history.best_epoch - 1];
    let meta = CheckpointMeta {
        epochs_run: history.epochs.len(),
        best_epoch: history.best_epoch,
        best_metric: best.dev_f1.selection(),
    };
    io::save_checkpoint(&args.out, &params, Some(meta))?;
    if let Some(history_path) = &args.history {
        io::write_text(history_path, &io::history_jsonl(&history))?;
    }

    let mut manifest = Manifest::new("train");
    if let Some(p) = &args.train {
        manifest.input(p);
    }
    if let Some(p) = &args.pairs {
        manifest.input(p);
    }
    if let Some(p) = &args.encoder {
        manifest.input(p);
    }
    manifest.input(&args.dev);
    manifest.output(&args.out);
    if let Some(p) = &args.history {
        manifest.output(p);
    }
    manifest
        .seed(config.seed)
        .set("objective", objective_name(objective))
        .set("probe", args.probe)
        .set(
            "task",
            args.task
                .map(|t| t.to_task().name().to_string())
                .unwrap_or_default(),
        )
        .set("learning_rate", config.learning_rate)
        .set("max_epochs", config.max_epochs as u64)
        .set("patience", config.patience as u64)
        .set("batch_size", config.batch_size as u64)
        .set("margin", config.loss.margin)
        .set("triplet_epsilon", config.loss.triplet_epsilon)
        .set("mtl_task_weights", json!(config.mtl_task_weights.to_vec()))
        .set("hash_buckets", encoder_config.hash_buckets as u64)
        .set("ngram_min", encoder_config.ngram_min as u64)
        .set("ngram_max", encoder_config.ngram_max as u64)
        .set("embed_dim", encoder_config.embed_dim as u64)
        .set("out_dim", encoder_config.out_dim as u64)
        .set("dropout_p", encoder_config.dropout_p)
        .set("encoder_seed", encoder_config.seed);
    manifest.write()?;
    eprintln!("checkpoint -> {}", args.out.display());
    Ok(())
}

fn objective_name(objective: ObjectiveArg) -> &'static str {
    match objective {
        ObjectiveArg::Ce => "ce",
        ObjectiveArg::Contrastive => "contrastive",
        ObjectiveArg::OnlineContrastive => "online-contrastive",
        ObjectiveArg::BatchAll => "batch-all",
        ObjectiveArg::Multitask => "multitask",
    }
}

fn score_predictions(
    predictions: &[usize],
    corpus: &Corpus,
    task: Task,
) -> Result<Metrics, CliError> {
    let gold: Vec<usize> = corpus
        .records()
        .iter()
        .map(|r| r.class_index(task))
        .collect();
    evaluate(predictions, &gold, task.class_count()).map_err(|e| CliError::Data(e.to_string()))
}

fn emit_metrics(
    command: &str,
    task: Task,
    metrics: &Metrics,
    out: Option<&Path>,
    inputs: &[&Path],
) -> Result<(), CliError> {
    let doc = io::metrics_json(task, metrics);
    io::emit_json(out, &doc)?;
    if let Some(path) = out {
        let mut manifest = Manifest::new(command);
        for input in inputs {
            manifest.input(input);
        }
        manifest.output(path).set("task", task.name());
        manifest.write()?;
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let task = args.task.to_task();
    let checkpoint = io::load_checkpoint(&args.model)?;
    let corpus = io::load_corpus(&args.input, !args.no_header)?;
    if corpus.is_empty() {
        return Err(CliError::Data("evaluation corpus is empty".into()));
    }
    let predictions: Vec<usize> = corpus
        .records()
        .iter()
        .map(|r| checkpoint.params.predict(&r.text, task))
        .collect();
    let metrics = score_predictions(&predictions, &corpus, task)?;
    emit_metrics(
        "eval",
        task,
        &metrics,
        args.out.as_deref(),
        &[&args.model, &args.input],
    )
}

pub fn baseline(args: &BaselineArgs) -> Result<(), CliError> {
    let task = args.task.to_task();
    let train_corpus = io::load_corpus(&args.train, !args.no_header)?;
    let eval_corpus = io::load_corpus(&args.eval_set, !args.no_header)?;
    let metrics = majority_baseline(&train_corpus, &eval_corpus, task)
        .map_err(|e| CliError::Data(e.to_string()))?;
    emit_metrics(
        "baseline",
        task,
        &metrics,
        args.out.as_deref(),
        &[&args.train, &args.eval_set],
    )
}

pub fn ensemble(args: &EnsembleArgs) -> Result<(), CliError> {
    let task = args.task.to_task();
    let checkpoints: Vec<_> = args
        .models
        .iter()
        .map(|p| io::load_checkpoint(p))
        .collect::<Result<_, _>>()?;
    let members: Vec<&ModelParams> = checkpoints.iter().map(|c| &c.params).collect();
    let corpus = io::load_corpus(&args.input, !args.no_header)?;
    if corpus.is_empty() {
        return Err(CliError::Data("evaluation corpus is empty".into()));
    }
    let predictions: Vec<usize> = corpus
        .records()
        .iter()
        .map(|r| ensemble_predict(&members, &r.text, task))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    let metrics = score_predictions(&predictions, &corpus, task)?;
    let mut inputs: Vec<&Path> = args.models.iter().map(|p| p.as_path()).collect();
    inputs.push(&args.input);
    emit_metrics("ensemble", task, &metrics, args.out.as_deref(), &inputs)
}

pub fn project(args: &ProjectArgs) -> Result<(), CliError> {
    let task = args.task.to_task();
    let checkpoint = io::load_checkpoint(&args.model)?;
    let corpus = io::load_corpus(&args.input, !args.no_header)?;
    let embeddings: Vec<Vec<f64>> = corpus
        .records()
        .iter()
        .map(|r| checkpoint.params.encode(&r.text, DropoutMode::Eval))
        .collect();
    let labels: Vec<&str> = corpus
        .records()
        .iter()
        .map(|r| r.label_token(task))
        .collect();
    let projection = pca_project(&embeddings, &labels, args.components)
        .map_err(|e| CliError::Data(e.to_string()))?;
    io::write_text(&args.out, &io::projection_csv(&projection))?;
    let mut manifest = Manifest::new("project");
    manifest
        .input(&args.model)
        .input(&args.input)
        .output(&args.out)
        .set("task", task.name())
        .set("components", args.components as u64)
        .set("explained_variance", json!(projection.explained));
    manifest.write()?;
    eprintln!(
        "projected {} points, explained variance {:?} -> {}",
        projection.coordinates.len(),
        projection.explained,
        args.out.display()
    );
    Ok(())
}
