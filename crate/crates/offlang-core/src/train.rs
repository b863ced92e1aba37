//! Training procedures: classification fine-tuning with early stopping,
//! contrastive fine-tuning of the encoder, frozen-encoder linear probing,
//! and multi-task learning over the three sub-tasks.
//!
//! All procedures are plain mini-batch SGD, deterministic given (data,
//! config, seed): epoch shuffles and dropout masks are derived from the
//! config seed with fixed stream tags. Every epoch evaluates on the dev set
//! and the best checkpoint is returned; early stopping ends a run after
//! `patience` epochs without improvement. Multi-task training runs a fixed
//! epoch budget (no early stop) and still reports the best epoch.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Corpus, Task};
use crate::evalviz;
use crate::model::{
    self, DropoutMode, EncoderConfig, GradientBatch, ModelError, ModelParams, MtlExample,
    PairExample,
};
use crate::objectives::{cosine_distance, LossConfig, LossKind, ObjectiveError};
use crate::pairs::PairDataset;
use crate::rng::{derive_seed, Rng};

/// Stream tags for seed derivation, so shuffling and dropout never share a
/// random stream.
const STREAM_SHUFFLE: u64 = 1;
const STREAM_DROPOUT: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossConfig,
    /// Per-task loss weights for multi-task training, order A, B, C.
    pub mtl_task_weights: [f64; 3],
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            max_epochs: 100,
            patience: 10,
            batch_size: 32,
            seed: 0,
            loss: LossConfig::default(),
            mtl_task_weights: [1.0, 1.0, 1.0],
        }
    }
}

impl TrainConfig {
    /// The multi-task protocol default: a fixed five-epoch budget.
    pub fn multitask_default() -> Self {
        TrainConfig {
            max_epochs: 5,
            patience: 5,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
            || !self.learning_rate.is_finite()
        {
            return Err(TrainError::InvalidConfig("learning_rate must be positive"));
        }
        if self.max_epochs == 0 || self.batch_size == 0 {
            return Err(TrainError::InvalidConfig(
                "max_epochs and batch_size must be >= 1",
            ));
        }
        if self.patience == 0 || self.patience > self.max_epochs {
            return Err(TrainError::InvalidConfig(
                "need 1 <= patience <= max_epochs",
            ));
        }
        let weights_ok = self
            .mtl_task_weights
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
            && self.mtl_task_weights.iter().sum::<f64>() > 0.0;
        if !weights_ok {
            return Err(TrainError::InvalidConfig(
                "task weights must be >= 0 with a positive sum",
            ));
        }
        self.loss.validate()?;
        Ok(())
    }
}

/// Dev macro-F1 per task for one epoch; tasks not evaluated stay `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskF1 {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
}

impl TaskF1 {
    pub fn single(task: Task, f1: f64) -> Self {
        let mut out = TaskF1 {
            a: None,
            b: None,
            c: None,
        };
        match task {
            Task::A => out.a = Some(f1),
            Task::B => out.b = Some(f1),
            Task::C => out.c = Some(f1),
        }
        out
    }

    /// Selection metric: unweighted mean of the evaluated tasks.
    pub fn selection(&self) -> f64 {
        let values: Vec<f64> = [self.a, self.b, self.c].into_iter().flatten().collect();
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_f1: TaskF1,
    /// Batches skipped for lacking valid pairs/triplets.
    pub skipped_batches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose checkpoint is returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    InvalidConfig(&'static str),
    /// The task needs at least two distinct classes in train and dev.
    SingleClassCorpus(Task),
    UnsupportedTask(Task),
    /// The configured objective does not accept the supplied data kind.
    ObjectiveDataMismatch(LossKind),
    EmptyData,
    Model(ModelError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::InvalidConfig(msg) => write!(f, "invalid train config: {msg}"),
            TrainError::SingleClassCorpus(t) => {
                write!(f, "task {t} needs at least two classes in train and dev")
            }
            TrainError::UnsupportedTask(t) => {
                write!(
                    f,
                    "classification fine-tuning covers the binary tasks, not {t}"
                )
            }
            TrainError::ObjectiveDataMismatch(kind) => {
                write!(
                    f,
                    "objective {} does not accept the supplied data",
                    kind.name()
                )
            }
            TrainError::EmptyData => f.write_str("no training data"),
            TrainError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}

impl From<ObjectiveError> for TrainError {
    fn from(e: ObjectiveError) -> Self {
        TrainError::Model(ModelError::Objective(e))
    }
}

fn distinct_classes(corpus: &Corpus, task: Task) -> usize {
    let mut seen = [false; 7];
    for r in corpus.records() {
        seen[r.class_index(task)] = true;
    }
    seen.iter().filter(|&&s| s).count()
}

fn macro_f1_of_predictions(params: &ModelParams, dev: &Corpus, task: Task) -> f64 {
    let predictions: Vec<usize> = dev
        .records()
        .iter()
        .map(|r| params.predict(&r.text, task))
        .collect();
    let gold: Vec<usize> = dev.records().iter().map(|r| r.class_index(task)).collect();
    evalviz::evaluate(&predictions, &gold, task.class_count())
        .map(|m| m.macro_f1)
        .expect("dev set evaluation is well-formed")
}

/// Nearest-centroid macro-F1 on dev embeddings: the cheap, monotone proxy
/// used to select checkpoints during contrastive fine-tuning.
fn centroid_macro_f1(params: &ModelParams, dev: &Corpus, task: Task) -> f64 {
    let classes = task.class_count();
    let embeddings: Vec<Vec<f64>> = dev
        .records()
        .iter()
        .map(|r| params.encode(&r.text, DropoutMode::Eval))
        .collect();
    let gold: Vec<usize> = dev.records().iter().map(|r| r.class_index(task)).collect();
    let dim = params.config().out_dim;
    let mut centroids = vec![vec![0.0f64; dim]; classes];
    let mut counts = vec![0usize; classes];
    for (e, &g) in embeddings.iter().zip(&gold) {
        counts[g] += 1;
        for (c, &x) in centroids[g].iter_mut().zip(e) {
            *c += x;
        }
    }
    for (centroid, &count) in centroids.iter_mut().zip(&counts) {
        if count > 0 {
            for c in centroid.iter_mut() {
                *c /= count as f64;
            }
        }
    }
    let predictions: Vec<usize> = embeddings
        .iter()
        .map(|e| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (class, centroid) in centroids.iter().enumerate() {
                if counts[class] == 0 {
                    continue;
                }
                // zero-norm guard: treat as maximally distant
                let d = cosine_distance(e, centroid).unwrap_or(2.0);
                if d < best_d {
                    best_d = d;
                    best = class;
                }
            }
            best
        })
        .collect();
    evalviz::evaluate(&predictions, &gold, classes)
        .map(|m| m.macro_f1)
        .expect("dev set evaluation is well-formed")
}

/// Shared epoch loop: run, evaluate, keep the best, optionally stop early.
fn training_loop<E, D>(
    mut params: ModelParams,
    config: &TrainConfig,
    early_stop: bool,
    mut run_epoch: E,
    mut eval_dev: D,
) -> Result<(ModelParams, TrainHistory), TrainError>
where
    E: FnMut(&mut ModelParams, usize) -> Result<(f64, usize), TrainError>,
    D: FnMut(&ModelParams) -> TaskF1,
{
    let mut history = TrainHistory {
        epochs: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best_params = params.clone();
    let mut best_metric = f64::NEG_INFINITY;
    for epoch in 1..=config.max_epochs {
        let (train_loss, skipped_batches) = run_epoch(&mut params, epoch)?;
        let dev_f1 = eval_dev(&params);
        let metric = dev_f1.selection();
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            dev_f1,
            skipped_batches,
        });
        if metric > best_metric {
            best_metric = metric;
            history.best_epoch = epoch;
            best_params = params.clone();
        } else if early_stop && epoch - history.best_epoch >= config.patience {
            history.stopped_early = true;
            break;
        }
    }
    Ok((best_params, history))
}

fn shuffled_indices(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::seed_from(derive_seed(seed, &[STREAM_SHUFFLE, epoch as u64]));
    rng.shuffle(&mut order);
    order
}

fn batch_dropout(seed: u64, epoch: usize, batch: usize) -> DropoutMode {
    DropoutMode::Train {
        seed: derive_seed(seed, &[STREAM_DROPOUT, epoch as u64, batch as u64]),
    }
}

/// Classification fine-tuning on one binary task: mini-batch SGD on
/// cross-entropy over encoder and head, dev macro-F1 selection, early
/// stopping, best checkpoint returned.
pub fn train_classifier(
    train: &Corpus,
    dev: &Corpus,
    task: Task,
    encoder: &EncoderConfig,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainHistory), TrainError> {
    config.validate()?;
    if task == Task::C {
        return Err(TrainError::UnsupportedTask(task));
    }
    if distinct_classes(train, task) < 2 || distinct_classes(dev, task) < 2 {
        return Err(TrainError::SingleClassCorpus(task));
    }
    let params = ModelParams::init(encoder)?;
    let ce = LossConfig::new(LossKind::CrossEntropy);
    let examples: Vec<(&str, usize)> = train
        .records()
        .iter()
        .map(|r| (r.text.as_str(), r.class_index(task)))
        .collect();
    training_loop(
        params,
        config,
        true,
        |params, epoch| {
            let order = shuffled_indices(examples.len(), config.seed, epoch);
            let mut weighted = 0.0;
            for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
                let batch: Vec<(&str, usize)> = chunk.iter().map(|&i| examples[i]).collect();
                let (loss, grads) = model::gradient(
                    params,
                    &GradientBatch::Labeled {
                        task,
                        examples: &batch,
                    },
                    &ce,
                    batch_dropout(config.seed, epoch, batch_idx),
                )?;
                params.apply_step(&grads, config.learning_rate);
                weighted += loss * batch.len() as f64;
            }
            Ok((weighted / examples.len() as f64, 0))
        },
        |params| TaskF1::single(task, macro_f1_of_predictions(params, dev, task)),
    )
}

/// Data accepted by [`train_contrastive`]: pair files feed the pairwise
/// objectives, a labeled corpus feeds batch-all triplet.
#[derive(Debug, Clone, Copy)]
pub enum ContrastiveData<'a> {
    Pairs(&'a PairDataset),
    Corpus(&'a Corpus),
}

/// Contrastive fine-tuning of the encoder only. Checkpoint selection uses
/// nearest-centroid macro-F1 on dev embeddings (sub-task A). Batches without
/// the pairs/triplets their objective needs are skipped and counted.
pub fn train_contrastive(
    data: ContrastiveData<'_>,
    dev: &Corpus,
    encoder: &EncoderConfig,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainHistory), TrainError> {
    config.validate()?;
    if dev.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let params = ModelParams::init(encoder)?;
    let eval_dev =
        |params: &ModelParams| TaskF1::single(Task::A, centroid_macro_f1(params, dev, Task::A));
    match (config.loss.kind, data) {
        (LossKind::Contrastive | LossKind::OnlineContrastive, ContrastiveData::Pairs(dataset)) => {
            if dataset.pairs.is_empty() {
                return Err(TrainError::EmptyData);
            }
            let online = config.loss.kind == LossKind::OnlineContrastive;
            training_loop(
                params,
                config,
                true,
                |params, epoch| {
                    let order = shuffled_indices(dataset.pairs.len(), config.seed, epoch);
                    let mut weighted = 0.0;
                    let mut used = 0usize;
                    let mut skipped = 0usize;
                    for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
                        if online {
                            let similar = chunk.iter().filter(|&&i| dataset.pairs[i].similar);
                            let n_similar = similar.count();
                            if n_similar == 0 || n_similar == chunk.len() {
                                skipped += 1;
                                continue;
                            }
                        }
                        let batch: Vec<PairExample<'_>> = chunk
                            .iter()
                            .map(|&i| {
                                let p = &dataset.pairs[i];
                                PairExample {
                                    text_a: &p.text_a,
                                    text_b: &p.text_b,
                                    similar: p.similar,
                                }
                            })
                            .collect();
                        let (loss, grads) = model::gradient(
                            params,
                            &GradientBatch::Pairs(&batch),
                            &config.loss,
                            batch_dropout(config.seed, epoch, batch_idx),
                        )?;
                        params.apply_step_encoder(&grads, config.learning_rate);
                        weighted += loss * batch.len() as f64;
                        used += batch.len();
                    }
                    let mean = if used == 0 {
                        0.0
                    } else {
                        weighted / used as f64
                    };
                    Ok((mean, skipped))
                },
                eval_dev,
            )
        }
        (LossKind::BatchAllTriplet, ContrastiveData::Corpus(corpus)) => {
            if corpus.is_empty() {
                return Err(TrainError::EmptyData);
            }
            let examples: Vec<(&str, usize)> = corpus
                .records()
                .iter()
                .map(|r| (r.text.as_str(), r.class_index(Task::A)))
                .collect();
            training_loop(
                params,
                config,
                true,
                |params, epoch| {
                    let order = stratified_order(&examples, config.seed, epoch);
                    let mut weighted = 0.0;
                    let mut used = 0usize;
                    let mut skipped = 0usize;
                    for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
                        let batch: Vec<(&str, usize)> =
                            chunk.iter().map(|&i| examples[i]).collect();
                        let step = model::gradient(
                            params,
                            &GradientBatch::Labeled {
                                task: Task::A,
                                examples: &batch,
                            },
                            &config.loss,
                            batch_dropout(config.seed, epoch, batch_idx),
                        );
                        match step {
                            Ok((loss, grads)) => {
                                params.apply_step_encoder(&grads, config.learning_rate);
                                weighted += loss * batch.len() as f64;
                                used += batch.len();
                            }
                            Err(ModelError::Objective(ObjectiveError::NoValidTriplet)) => {
                                skipped += 1;
                            }
                            Err(other) => return Err(other.into()),
                        }
                    }
                    let mean = if used == 0 {
                        0.0
                    } else {
                        weighted / used as f64
                    };
                    Ok((mean, skipped))
                },
                eval_dev,
            )
        }
        (kind, _) => Err(TrainError::ObjectiveDataMismatch(kind)),
    }
}

/// Class-interleaved ordering: shuffle within each class, then merge classes
/// proportionally so consecutive batch windows mix classes where possible.
fn stratified_order(examples: &[(&str, usize)], seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = Rng::seed_from(derive_seed(seed, &[STREAM_SHUFFLE, epoch as u64]));
    let max_class = examples.iter().map(|&(_, c)| c).max().unwrap_or(0);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); max_class + 1];
    for (i, &(_, class)) in examples.iter().enumerate() {
        groups[class].push(i);
    }
    for group in &mut groups {
        rng.shuffle(group);
    }
    let totals: Vec<usize> = groups.iter().map(Vec::len).collect();
    let mut cursors = vec![0usize; groups.len()];
    let mut order = Vec::with_capacity(examples.len());
    for _ in 0..examples.len() {
        // pick the class with the largest remaining fraction of its total
        let mut pick = None;
        let mut pick_score = -1.0f64;
        for (class, group) in groups.iter().enumerate() {
            let remaining = group.len() - cursors[class];
            if remaining == 0 {
                continue;
            }
            let score = remaining as f64 / totals[class] as f64;
            if score > pick_score {
                pick_score = score;
                pick = Some(class);
            }
        }
        let class = pick.expect("elements remain while order is incomplete");
        order.push(groups[class][cursors[class]]);
        cursors[class] += 1;
    }
    order
}

/// Train only the task head on top of a frozen encoder. The returned
/// parameters are bit-identical to `encoder` outside that head.
pub fn train_frozen_probe(
    encoder: &ModelParams,
    train: &Corpus,
    dev: &Corpus,
    task: Task,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainHistory), TrainError> {
    config.validate()?;
    if distinct_classes(train, task) < 2 || distinct_classes(dev, task) < 2 {
        return Err(TrainError::SingleClassCorpus(task));
    }
    let frozen_digest = encoder.encoder_bits_digest();
    let ce = LossConfig::new(LossKind::CrossEntropy);
    let examples: Vec<(&str, usize)> = train
        .records()
        .iter()
        .map(|r| (r.text.as_str(), r.class_index(task)))
        .collect();
    let result = training_loop(
        encoder.clone(),
        config,
        true,
        |params, epoch| {
            let order = shuffled_indices(examples.len(), config.seed, epoch);
            let mut weighted = 0.0;
            for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
                let batch: Vec<(&str, usize)> = chunk.iter().map(|&i| examples[i]).collect();
                let (loss, grads) = model::gradient(
                    params,
                    &GradientBatch::Labeled {
                        task,
                        examples: &batch,
                    },
                    &ce,
                    batch_dropout(config.seed, epoch, batch_idx),
                )?;
                params.apply_step_head(task, &grads, config.learning_rate);
                weighted += loss * batch.len() as f64;
            }
            Ok((weighted / examples.len() as f64, 0))
        },
        |params| TaskF1::single(task, macro_f1_of_predictions(params, dev, task)),
    )?;
    debug_assert_eq!(result.0.encoder_bits_digest(), frozen_digest);
    Ok(result)
}

/// Joint training of the shared encoder and all three heads; per batch the
/// loss is the task-weight-ed sum of head cross-entropies. Runs the full
/// epoch budget (the protocol fixes it, default five) and reports per-task
/// dev macro-F1 each epoch; the best epoch maximizes their mean.
pub fn train_multitask(
    train: &Corpus,
    dev: &Corpus,
    encoder: &EncoderConfig,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainHistory), TrainError> {
    config.validate()?;
    if distinct_classes(train, Task::A) < 2 {
        return Err(TrainError::SingleClassCorpus(Task::A));
    }
    if dev.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let params = ModelParams::init(encoder)?;
    let weights = config.mtl_task_weights;
    let examples: Vec<(&str, [usize; 3])> = train
        .records()
        .iter()
        .map(|r| {
            (
                r.text.as_str(),
                [
                    r.class_index(Task::A),
                    r.class_index(Task::B),
                    r.class_index(Task::C),
                ],
            )
        })
        .collect();
    training_loop(
        params,
        config,
        false,
        |params, epoch| {
            let order = shuffled_indices(examples.len(), config.seed, epoch);
            let mut weighted = 0.0;
            for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
                let batch: Vec<MtlExample<'_>> = chunk
                    .iter()
                    .map(|&i| MtlExample {
                        text: examples[i].0,
                        labels: examples[i].1,
                    })
                    .collect();
                let (loss, grads) = model::multitask_gradient(
                    params,
                    &batch,
                    weights,
                    batch_dropout(config.seed, epoch, batch_idx),
                )?;
                params.apply_step(&grads, config.learning_rate);
                weighted += loss * batch.len() as f64;
            }
            Ok((weighted / examples.len() as f64, 0))
        },
        |params| TaskF1 {
            a: Some(macro_f1_of_predictions(params, dev, Task::A)),
            b: Some(macro_f1_of_predictions(params, dev, Task::B)),
            c: Some(macro_f1_of_predictions(params, dev, Task::C)),
        },
    )
}

/// The same nearest-centroid dev proxy the contrastive trainer selects by.
pub fn nearest_centroid_macro_f1(params: &ModelParams, dev: &Corpus, task: Task) -> f64 {
    centroid_macro_f1(params, dev, task)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tsv;
    use crate::pairs::{build_pools, sample_pairs};
    use alloc::format;
    use alloc::string::String;

    const BENIGN: [&str; 12] = [
        "coffee", "morning", "friend", "book", "river", "music", "garden", "lunch", "walk",
        "study", "قهوة", "صباح",
    ];

    /// Deterministic hierarchy-consistent fixture. Offensive texts carry
    /// "xbad"; hateful ones also carry "xhate" plus one class marker.
    pub(crate) fn toy_fixture(n: usize, seed: u64, tag: &str) -> Corpus {
        let mut rng = Rng::seed_from(seed);
        let mut rows = String::new();
        for i in 0..n {
            let mut words: Vec<&str> = (0..2)
                .map(|_| BENIGN[rng.below(BENIGN.len() as u64) as usize])
                .collect();
            let off = rng.next_f64() < 0.35;
            let hs = off && rng.next_f64() < 0.45;
            let (a, b, c) = if hs {
                let (marker, class) = match rng.below(3) {
                    0 => ("xrace", "HS1"),
                    1 => ("xsect", "HS3"),
                    _ => ("xfem", "HS6"),
                };
                words.push("xbad");
                words.push("xhate");
                words.push(marker);
                ("OFF", "HS", class)
            } else if off {
                words.push("xbad");
                ("OFF", "NOT_HS", "NOT_HS")
            } else {
                ("NOT_OFF", "NOT_HS", "NOT_HS")
            };
            let last = words.len() - 1;
            let slot = rng.below(words.len() as u64) as usize;
            words.swap(slot, last);
            rows.push_str(&format!(
                "{tag}{i}\t{}\t{a}\t{b}\t{c}\tNOT_VLG\tNOT_VIO\n",
                words.join(" ")
            ));
        }
        parse_tsv(&rows, false, tag).unwrap()
    }

    pub(crate) fn toy_encoder(seed: u64) -> EncoderConfig {
        EncoderConfig {
            hash_buckets: 512,
            ngram_min: 2,
            ngram_max: 3,
            embed_dim: 24,
            out_dim: 24,
            dropout_p: 0.05,
            seed,
        }
    }

    fn fast_config(lr: f64, epochs: usize, patience: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            max_epochs: epochs,
            patience,
            batch_size: 16,
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn classifier_separates_the_toy_fixture() {
        let train = toy_fixture(200, 1, "tr");
        let dev = toy_fixture(50, 2, "dv");
        let mut config = fast_config(3.0, 100, 10, 7);
        config.batch_size = 4;
        let (params, history) =
            train_classifier(&train, &dev, Task::A, &toy_encoder(3), &config).unwrap();
        let best = history.epochs[history.best_epoch - 1].dev_f1.a.unwrap();
        assert!(best >= 0.95, "best dev macro-F1 {best}");
        // returned params reproduce the recorded best
        let again = macro_f1_of_predictions(&params, &dev, Task::A);
        assert!((again - best).abs() < 1e-12);
        // best epoch maximizes the recorded metric
        let max = history
            .epochs
            .iter()
            .map(|e| e.dev_f1.a.unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - max).abs() < 1e-12);
    }

    #[test]
    fn plateaued_metric_stops_after_patience() {
        let train = toy_fixture(60, 3, "tr");
        let dev = toy_fixture(30, 4, "dv");
        // learning rate so small that predictions never move: constant metric
        let config = fast_config(1e-12, 100, 5, 9);
        let (_, history) =
            train_classifier(&train, &dev, Task::A, &toy_encoder(5), &config).unwrap();
        assert!(history.stopped_early);
        assert_eq!(history.best_epoch, 1);
        assert_eq!(history.epochs.len(), config.patience + 1);
        assert_eq!(history.epochs.len(), history.best_epoch + config.patience);
    }

    #[test]
    fn single_epoch_budget_runs_once_without_early_stop() {
        let train = toy_fixture(40, 5, "tr");
        let dev = toy_fixture(20, 6, "dv");
        let config = fast_config(0.1, 1, 1, 9);
        let (_, history) =
            train_classifier(&train, &dev, Task::A, &toy_encoder(5), &config).unwrap();
        assert_eq!(history.epochs.len(), 1);
        assert!(!history.stopped_early);
        assert_eq!(history.best_epoch, 1);
    }

    #[test]
    fn classifier_rejects_single_class_and_task_c() {
        let single = parse_tsv(
            "1\tok text\tNOT_OFF\tNOT_HS\tNOT_HS\tNOT_VLG\tNOT_VIO\n\
             2\tmore ok\tNOT_OFF\tNOT_HS\tNOT_HS\tNOT_VLG\tNOT_VIO\n",
            false,
            "s",
        )
        .unwrap();
        let config = fast_config(0.1, 2, 1, 0);
        assert_eq!(
            train_classifier(&single, &single, Task::A, &toy_encoder(0), &config).unwrap_err(),
            TrainError::SingleClassCorpus(Task::A)
        );
        let mixed = toy_fixture(30, 8, "m");
        assert_eq!(
            train_classifier(&mixed, &mixed, Task::C, &toy_encoder(0), &config).unwrap_err(),
            TrainError::UnsupportedTask(Task::C)
        );
    }

    #[test]
    fn training_is_deterministic() {
        let train = toy_fixture(80, 11, "tr");
        let dev = toy_fixture(30, 12, "dv");
        let config = fast_config(0.3, 6, 3, 21);
        let (p1, h1) = train_classifier(&train, &dev, Task::A, &toy_encoder(1), &config).unwrap();
        let (p2, h2) = train_classifier(&train, &dev, Task::A, &toy_encoder(1), &config).unwrap();
        assert_eq!(h1, h2);
        for i in 0..p1.flat_len() {
            assert_eq!(p1.flat_get(i).to_bits(), p2.flat_get(i).to_bits());
        }
    }

    #[test]
    fn a_small_gradient_step_descends() {
        let train = toy_fixture(32, 13, "tr");
        let examples: Vec<(&str, usize)> = train
            .records()
            .iter()
            .map(|r| (r.text.as_str(), r.class_index(Task::A)))
            .collect();
        let mut params = ModelParams::init(&toy_encoder(2)).unwrap();
        let ce = LossConfig::new(LossKind::CrossEntropy);
        let batch = GradientBatch::Labeled {
            task: Task::A,
            examples: &examples,
        };
        let (before, grads) = model::gradient(&params, &batch, &ce, DropoutMode::Eval).unwrap();
        params.apply_step(&grads, 1e-3);
        let after = model::batch_loss(&params, &batch, &ce, DropoutMode::Eval).unwrap();
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn contrastive_training_separates_pair_distances() {
        let train = toy_fixture(120, 14, "tr");
        let dev = toy_fixture(40, 15, "dv");
        let pools = build_pools(&train).unwrap();
        let dataset = sample_pairs(&pools, 2000, 5).unwrap();
        let mut config = fast_config(0.5, 30, 10, 31);
        config.loss = LossConfig::new(LossKind::OnlineContrastive);
        let (params, history) = train_contrastive(
            ContrastiveData::Pairs(&dataset),
            &dev,
            &toy_encoder(6),
            &config,
        )
        .unwrap();
        assert!(history.best_epoch >= 1);

        // distance-statistics oracle on held-out records
        let embeddings: Vec<Vec<f64>> = dev
            .records()
            .iter()
            .map(|r| params.encode(&r.text, DropoutMode::Eval))
            .collect();
        let gold: Vec<usize> = dev
            .records()
            .iter()
            .map(|r| r.class_index(Task::A))
            .collect();
        let mut pos = (0.0, 0usize);
        let mut neg = (0.0, 0usize);
        for i in 0..embeddings.len() {
            for j in (i + 1)..embeddings.len() {
                let d = cosine_distance(&embeddings[i], &embeddings[j]).unwrap();
                if gold[i] == gold[j] {
                    pos = (pos.0 + d, pos.1 + 1);
                } else {
                    neg = (neg.0 + d, neg.1 + 1);
                }
            }
        }
        let mean_pos = pos.0 / pos.1 as f64;
        let mean_neg = neg.0 / neg.1 as f64;
        assert!(
            mean_pos < mean_neg,
            "positive pairs ({mean_pos}) not closer than negative pairs ({mean_neg})"
        );
    }

    #[test]
    fn contrastive_rejects_mismatched_data() {
        let train = toy_fixture(40, 16, "tr");
        let dev = toy_fixture(20, 17, "dv");
        let mut config = fast_config(0.1, 2, 1, 0);
        config.loss = LossConfig::new(LossKind::BatchAllTriplet);
        let pools = build_pools(&train).unwrap();
        let dataset = sample_pairs(&pools, 40, 1).unwrap();
        assert_eq!(
            train_contrastive(
                ContrastiveData::Pairs(&dataset),
                &dev,
                &toy_encoder(0),
                &config
            )
            .unwrap_err(),
            TrainError::ObjectiveDataMismatch(LossKind::BatchAllTriplet)
        );
        config.loss = LossConfig::new(LossKind::Contrastive);
        assert_eq!(
            train_contrastive(
                ContrastiveData::Corpus(&train),
                &dev,
                &toy_encoder(0),
                &config
            )
            .unwrap_err(),
            TrainError::ObjectiveDataMismatch(LossKind::Contrastive)
        );
        let empty = PairDataset {
            pairs: Vec::new(),
            plan: crate::pairs::SamplingPlan { size: 0, seed: 0 },
        };
        assert_eq!(
            train_contrastive(
                ContrastiveData::Pairs(&empty),
                &dev,
                &toy_encoder(0),
                &config
            )
            .unwrap_err(),
            TrainError::EmptyData
        );
    }

    #[test]
    fn batch_all_skips_degenerate_batches() {
        // all-OFF corpus: every batch lacks a valid triplet, training is a
        // counted no-op rather than a failure
        let mut rows = String::new();
        for i in 0..20 {
            rows.push_str(&format!(
                "o{i}\txbad text {i}\tOFF\tNOT_HS\tNOT_HS\tNOT_VLG\tNOT_VIO\n"
            ));
        }
        let train = parse_tsv(&rows, false, "t").unwrap();
        let dev = toy_fixture(16, 18, "dv");
        let mut config = fast_config(0.1, 2, 1, 3);
        config.loss = LossConfig::new(LossKind::BatchAllTriplet);
        config.batch_size = 8;
        let (_, history) = train_contrastive(
            ContrastiveData::Corpus(&train),
            &dev,
            &toy_encoder(1),
            &config,
        )
        .unwrap();
        assert!(history.epochs.iter().all(|e| e.skipped_batches > 0));
        assert!(history.epochs.iter().all(|e| e.train_loss == 0.0));
    }

    #[test]
    fn stratified_order_mixes_classes_in_batches() {
        let examples: Vec<(&str, usize)> = (0..40)
            .map(|i| {
                if i < 10 {
                    ("off", 0usize)
                } else {
                    ("ok", 1usize)
                }
            })
            .collect();
        let order = stratified_order(&examples, 5, 1);
        assert_eq!(order.len(), 40);
        // with a 1:3 ratio and batch 8, every batch window holds both classes
        for chunk in order.chunks(8) {
            let zeros = chunk.iter().filter(|&&i| examples[i].1 == 0).count();
            assert!(zeros > 0 && zeros < chunk.len(), "chunk is single-class");
        }
    }

    #[test]
    fn frozen_probe_keeps_encoder_bits() {
        let train = toy_fixture(100, 19, "tr");
        let dev = toy_fixture(30, 20, "dv");
        let encoder = ModelParams::init(&toy_encoder(4)).unwrap();
        let digest = encoder.encoder_bits_digest();
        let config = fast_config(0.5, 20, 5, 2);
        let (probed, history) =
            train_frozen_probe(&encoder, &train, &dev, Task::A, &config).unwrap();
        assert_eq!(probed.encoder_bits_digest(), digest);
        assert!(!history.epochs.is_empty());
    }

    #[test]
    fn multitask_runs_exactly_the_epoch_budget() {
        let train = toy_fixture(120, 22, "tr");
        let dev = toy_fixture(40, 23, "dv");
        let mut config = TrainConfig::multitask_default();
        config.learning_rate = 0.3;
        config.seed = 5;
        let (_, history) = train_multitask(&train, &dev, &toy_encoder(7), &config).unwrap();
        assert_eq!(history.epochs.len(), 5);
        assert!(!history.stopped_early);
        let record = &history.epochs[0];
        assert!(
            record.dev_f1.a.is_some() && record.dev_f1.b.is_some() && record.dev_f1.c.is_some()
        );
    }

    #[test]
    fn multitask_zero_weights_freeze_other_heads() {
        let train = toy_fixture(60, 24, "tr");
        let dev = toy_fixture(20, 25, "dv");
        let encoder = toy_encoder(8);
        let mut config = TrainConfig::multitask_default();
        config.learning_rate = 0.3;
        config.mtl_task_weights = [1.0, 0.0, 0.0];
        let init = ModelParams::init(&encoder).unwrap();
        let (trained, _) = train_multitask(&train, &dev, &encoder, &config).unwrap();
        assert_eq!(trained.head(Task::B), init.head(Task::B));
        assert_eq!(trained.head(Task::C), init.head(Task::C));
        assert_ne!(trained.head(Task::A), init.head(Task::A));
        assert_ne!(trained.encoder_bits_digest(), init.encoder_bits_digest());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = TrainConfig {
            patience: 200,
            ..TrainConfig::default()
        };
        assert!(matches!(
            config.validate(),
            Err(TrainError::InvalidConfig(_))
        ));
        config = TrainConfig::default();
        config.learning_rate = 0.0;
        assert!(matches!(
            config.validate(),
            Err(TrainError::InvalidConfig(_))
        ));
        config = TrainConfig::default();
        config.mtl_task_weights = [0.0, 0.0, 0.0];
        assert!(matches!(
            config.validate(),
            Err(TrainError::InvalidConfig(_))
        ));
    }
}
