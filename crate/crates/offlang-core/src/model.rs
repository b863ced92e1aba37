//! Small trainable text encoder with per-task dense heads.
//!
//! The encoder hashes character n-grams into an embedding table, averages the
//! hit rows, and maps the pooled vector through a projection with a tanh
//! output, optionally with inverted dropout after pooling during training.
//! It is the desk-scale stand-in for a pretrained transformer: the training
//! objectives, data construction, and protocols around it are the parts
//! under study, not the encoder itself, so it is kept small, dependency-free,
//! and exactly gradient-checkable.
//!
//! Everything here is f64 and fully deterministic given seeds: analytic
//! gradients are verified against central finite differences in the test
//! suites, and checkpoints round-trip bit-exactly.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::Task;
use crate::math;
use crate::objectives::{self, softmax, EmbeddingPair, LossConfig, LossKind, ObjectiveError};
use crate::rng::{derive_seed, Rng};

/// Encoder hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    /// Feature-hashing vocabulary size.
    pub hash_buckets: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub embed_dim: usize,
    /// Sentence-embedding dimension.
    pub out_dim: usize,
    pub dropout_p: f64,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            hash_buckets: 4096,
            ngram_min: 2,
            ngram_max: 4,
            embed_dim: 32,
            out_dim: 32,
            dropout_p: 0.1,
            seed: 0,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.hash_buckets == 0 || self.embed_dim == 0 || self.out_dim == 0 {
            return Err(ModelError::InvalidConfig("all dimensions must be >= 1"));
        }
        if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
            return Err(ModelError::InvalidConfig(
                "need 1 <= ngram_min <= ngram_max",
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(ModelError::InvalidConfig("dropout_p must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Dense head: `out_dim x classes` weights plus a bias per class.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl HeadParams {
    fn zeros(out_dim: usize, classes: usize) -> Self {
        HeadParams {
            weight: vec![0.0; out_dim * classes],
            bias: vec![0.0; classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.bias.len()
    }
}

/// Encoder parameters plus the three task heads.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: EncoderConfig,
    embedding: Vec<f64>,
    projection: Vec<f64>,
    proj_bias: Vec<f64>,
    heads: [HeadParams; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    InvalidConfig(&'static str),
    DimensionMismatch { expected: usize, found: usize },
    ObjectiveDataMismatch { kind: LossKind },
    Objective(ObjectiveError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidConfig(msg) => write!(f, "invalid encoder config: {msg}"),
            ModelError::DimensionMismatch { expected, found } => {
                write!(f, "embedding length {found}, head expects {expected}")
            }
            ModelError::ObjectiveDataMismatch { kind } => {
                write!(
                    f,
                    "objective {} does not accept this batch shape",
                    kind.name()
                )
            }
            ModelError::Objective(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ModelError {}

impl From<ObjectiveError> for ModelError {
    fn from(e: ObjectiveError) -> Self {
        ModelError::Objective(e)
    }
}

/// Dropout behavior of a forward pass. Training mode derives one mask per
/// example from the seed and the example's position, so a fixed seed makes
/// the composed loss a deterministic function of the parameters — which is
/// what lets finite differences check the analytic gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Eval,
    Train { seed: u64 },
}

fn task_slot(task: Task) -> usize {
    match task {
        Task::A => 0,
        Task::B => 1,
        Task::C => 2,
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Forward-pass intermediates kept for backprop.
struct EncodeTrace {
    buckets: Vec<usize>,
    mask: Option<Vec<f64>>,
    dropped: Vec<f64>,
    output: Vec<f64>,
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl ModelParams {
    /// Fresh parameters, uniform in (-0.05, 0.05), deterministic per seed.
    /// Blocks are drawn in a fixed order: embedding table, projection,
    /// projection bias, then head weights and biases for tasks A, B, C.
    pub fn init(config: &EncoderConfig) -> Result<ModelParams, ModelError> {
        config.validate()?;
        let mut rng = Rng::seed_from(config.seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| 0.05 * (2.0 * rng.next_f64() - 1.0))
                .collect()
        };
        let embedding = draw(config.hash_buckets * config.embed_dim);
        let projection = draw(config.embed_dim * config.out_dim);
        let proj_bias = draw(config.out_dim);
        let heads = [Task::A, Task::B, Task::C].map(|t| HeadParams {
            weight: draw(config.out_dim * t.class_count()),
            bias: draw(t.class_count()),
        });
        Ok(ModelParams {
            config: config.clone(),
            embedding,
            projection,
            proj_bias,
            heads,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn head(&self, task: Task) -> &HeadParams {
        &self.heads[task_slot(task)]
    }

    /// Bucket ids of the text's character n-grams, with multiplicity.
    fn ngram_buckets(&self, text: &str) -> Vec<usize> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let total = chars.len();
        let bytes = text.as_bytes();
        let mut buckets = Vec::new();
        for n in self.config.ngram_min..=self.config.ngram_max {
            if n > total {
                break;
            }
            for start in 0..=(total - n) {
                let lo = chars[start].0;
                let hi = if start + n < total {
                    chars[start + n].0
                } else {
                    bytes.len()
                };
                let hash = fnv1a(&bytes[lo..hi]);
                buckets.push((hash % self.config.hash_buckets as u64) as usize);
            }
        }
        buckets
    }

    fn dropout_mask(&self, mode: DropoutMode, example: u64) -> Option<Vec<f64>> {
        match mode {
            DropoutMode::Eval => None,
            DropoutMode::Train { seed } => {
                let p = self.config.dropout_p;
                if p == 0.0 {
                    return None;
                }
                let mut rng = Rng::seed_from(derive_seed(seed, &[example]));
                let keep = 1.0 / (1.0 - p);
                Some(
                    (0..self.config.embed_dim)
                        .map(|_| if rng.next_f64() < p { 0.0 } else { keep })
                        .collect(),
                )
            }
        }
    }

    fn encode_traced(&self, text: &str, mask: Option<Vec<f64>>) -> EncodeTrace {
        let buckets = self.ngram_buckets(text);
        let embed_dim = self.config.embed_dim;
        let out_dim = self.config.out_dim;
        let mut pooled = vec![0.0; embed_dim];
        if !buckets.is_empty() {
            for &b in &buckets {
                let row = &self.embedding[b * embed_dim..(b + 1) * embed_dim];
                for (p, &w) in pooled.iter_mut().zip(row) {
                    *p += w;
                }
            }
            let inv = 1.0 / buckets.len() as f64;
            for p in &mut pooled {
                *p *= inv;
            }
        }
        let dropped = match &mask {
            Some(m) => pooled.iter().zip(m).map(|(&p, &m)| p * m).collect(),
            None => pooled,
        };
        let mut output = self.proj_bias.clone();
        for i in 0..embed_dim {
            let x = dropped[i];
            if x == 0.0 {
                continue;
            }
            let row = &self.projection[i * out_dim..(i + 1) * out_dim];
            for (o, &w) in output.iter_mut().zip(row) {
                *o += x * w;
            }
        }
        for o in &mut output {
            *o = math::tanh(*o);
        }
        EncodeTrace {
            buckets,
            mask,
            dropped,
            output,
        }
    }

    /// Sentence embedding of `text`. Eval mode is deterministic; train mode
    /// applies the seeded dropout mask of example index 0.
    pub fn encode(&self, text: &str, mode: DropoutMode) -> Vec<f64> {
        let mask = self.dropout_mask(mode, 0);
        self.encode_traced(text, mask).output
    }

    /// Affine map from a sentence embedding to the task's logits.
    pub fn forward_head(&self, embedding: &[f64], task: Task) -> Result<Vec<f64>, ModelError> {
        let out_dim = self.config.out_dim;
        if embedding.len() != out_dim {
            return Err(ModelError::DimensionMismatch {
                expected: out_dim,
                found: embedding.len(),
            });
        }
        let head = self.head(task);
        let classes = head.classes();
        let mut logits = head.bias.clone();
        for i in 0..out_dim {
            let x = embedding[i];
            let row = &head.weight[i * classes..(i + 1) * classes];
            for (l, &w) in logits.iter_mut().zip(row) {
                *l += x * w;
            }
        }
        Ok(logits)
    }

    /// Eval-mode prediction: argmax of the task logits, ties to the lower
    /// class index.
    pub fn predict(&self, text: &str, task: Task) -> usize {
        let embedding = self.encode(text, DropoutMode::Eval);
        let logits = self
            .forward_head(&embedding, task)
            .expect("own embedding fits own head");
        argmax(&logits)
    }

    fn backprop_encoder(&self, trace: &EncodeTrace, grad_out: &[f64], grads: &mut ParamGrads) {
        let embed_dim = self.config.embed_dim;
        let out_dim = self.config.out_dim;
        let mut dz = vec![0.0; out_dim];
        for j in 0..out_dim {
            let o = trace.output[j];
            dz[j] = grad_out[j] * (1.0 - o * o);
        }
        for (gb, &d) in grads.proj_bias.iter_mut().zip(&dz) {
            *gb += d;
        }
        let mut ddropped = vec![0.0; embed_dim];
        for i in 0..embed_dim {
            let x = trace.dropped[i];
            let wrow = &self.projection[i * out_dim..(i + 1) * out_dim];
            let grow = &mut grads.projection[i * out_dim..(i + 1) * out_dim];
            let mut acc = 0.0;
            for j in 0..out_dim {
                grow[j] += x * dz[j];
                acc += wrow[j] * dz[j];
            }
            ddropped[i] = acc;
        }
        if trace.buckets.is_empty() {
            return;
        }
        let dpooled: Vec<f64> = match &trace.mask {
            Some(m) => ddropped.iter().zip(m).map(|(&d, &m)| d * m).collect(),
            None => ddropped,
        };
        let inv_k = 1.0 / trace.buckets.len() as f64;
        for &b in &trace.buckets {
            grads.touched.insert(b);
            let row = &mut grads.embedding[b * embed_dim..(b + 1) * embed_dim];
            for (g, &d) in row.iter_mut().zip(&dpooled) {
                *g += d * inv_k;
            }
        }
    }

    fn backprop_head(
        &self,
        task: Task,
        embedding: &[f64],
        dlogits: &[f64],
        grads: &mut ParamGrads,
    ) -> Vec<f64> {
        let head = self.head(task);
        let classes = head.classes();
        let hg = &mut grads.heads[task_slot(task)];
        for (g, &d) in hg.bias.iter_mut().zip(dlogits) {
            *g += d;
        }
        let mut demb = vec![0.0; embedding.len()];
        for i in 0..embedding.len() {
            let x = embedding[i];
            let wrow = &head.weight[i * classes..(i + 1) * classes];
            let grow = &mut hg.weight[i * classes..(i + 1) * classes];
            let mut acc = 0.0;
            for c in 0..classes {
                grow[c] += x * dlogits[c];
                acc += wrow[c] * dlogits[c];
            }
            demb[i] = acc;
        }
        demb
    }

    /// Take one SGD step over every parameter block.
    pub fn apply_step(&mut self, grads: &ParamGrads, lr: f64) {
        self.apply_step_encoder(grads, lr);
        for slot in 0..3 {
            apply_head(&mut self.heads[slot], &grads.heads[slot], lr);
        }
    }

    /// Step the encoder blocks only (contrastive fine-tuning).
    pub fn apply_step_encoder(&mut self, grads: &ParamGrads, lr: f64) {
        let embed_dim = self.config.embed_dim;
        for &b in &grads.touched {
            let prow = &mut self.embedding[b * embed_dim..(b + 1) * embed_dim];
            let grow = &grads.embedding[b * embed_dim..(b + 1) * embed_dim];
            for (p, &g) in prow.iter_mut().zip(grow) {
                *p -= lr * g;
            }
        }
        for (p, &g) in self.projection.iter_mut().zip(&grads.projection) {
            *p -= lr * g;
        }
        for (p, &g) in self.proj_bias.iter_mut().zip(&grads.proj_bias) {
            *p -= lr * g;
        }
    }

    /// Step one task head only (frozen-encoder probe).
    pub fn apply_step_head(&mut self, task: Task, grads: &ParamGrads, lr: f64) {
        let slot = task_slot(task);
        apply_head(&mut self.heads[slot], &grads.heads[slot], lr);
    }

    /// Total number of scalar parameters.
    pub fn flat_len(&self) -> usize {
        let mut n = self.embedding.len() + self.projection.len() + self.proj_bias.len();
        for h in &self.heads {
            n += h.weight.len() + h.bias.len();
        }
        n
    }

    fn flat_blocks(&self) -> [&[f64]; 9] {
        [
            &self.embedding,
            &self.projection,
            &self.proj_bias,
            &self.heads[0].weight,
            &self.heads[0].bias,
            &self.heads[1].weight,
            &self.heads[1].bias,
            &self.heads[2].weight,
            &self.heads[2].bias,
        ]
    }

    /// Read parameter `idx` in the fixed block order (embedding, projection,
    /// projection bias, head A/B/C weights and biases).
    pub fn flat_get(&self, idx: usize) -> f64 {
        let mut i = idx;
        for block in self.flat_blocks() {
            if i < block.len() {
                return block[i];
            }
            i -= block.len();
        }
        panic!("flat index {idx} out of range");
    }

    pub fn flat_set(&mut self, idx: usize, value: f64) {
        let mut i = idx;
        let [h0, h1, h2] = &mut self.heads;
        let blocks: [&mut Vec<f64>; 9] = [
            &mut self.embedding,
            &mut self.projection,
            &mut self.proj_bias,
            &mut h0.weight,
            &mut h0.bias,
            &mut h1.weight,
            &mut h1.bias,
            &mut h2.weight,
            &mut h2.bias,
        ];
        for block in blocks {
            if i < block.len() {
                block[i] = value;
                return;
            }
            i -= block.len();
        }
        panic!("flat index {idx} out of range");
    }

    /// Bit-level fingerprint of the encoder blocks; used to verify the
    /// frozen-probe contract.
    pub fn encoder_bits_digest(&self) -> u64 {
        let mut hash = FNV_OFFSET;
        let mut feed = |values: &[f64]| {
            for v in values {
                for b in v.to_bits().to_le_bytes() {
                    hash ^= b as u64;
                    hash = hash.wrapping_mul(FNV_PRIME);
                }
            }
        };
        feed(&self.embedding);
        feed(&self.projection);
        feed(&self.proj_bias);
        hash
    }
}

fn apply_head(head: &mut HeadParams, grads: &HeadParams, lr: f64) {
    for (p, &g) in head.weight.iter_mut().zip(&grads.weight) {
        *p -= lr * g;
    }
    for (p, &g) in head.bias.iter_mut().zip(&grads.bias) {
        *p -= lr * g;
    }
}

/// Gradients shaped like [`ModelParams`]. Embedding rows actually hit by a
/// batch are tracked in `touched` so the SGD step can skip the rest.
#[derive(Debug, Clone)]
pub struct ParamGrads {
    embedding: Vec<f64>,
    projection: Vec<f64>,
    proj_bias: Vec<f64>,
    heads: [HeadParams; 3],
    touched: BTreeSet<usize>,
}

impl ParamGrads {
    fn zeros(config: &EncoderConfig) -> Self {
        ParamGrads {
            embedding: vec![0.0; config.hash_buckets * config.embed_dim],
            projection: vec![0.0; config.embed_dim * config.out_dim],
            proj_bias: vec![0.0; config.out_dim],
            heads: [
                HeadParams::zeros(config.out_dim, Task::A.class_count()),
                HeadParams::zeros(config.out_dim, Task::B.class_count()),
                HeadParams::zeros(config.out_dim, Task::C.class_count()),
            ],
            touched: BTreeSet::new(),
        }
    }

    pub fn head(&self, task: Task) -> &HeadParams {
        &self.heads[task_slot(task)]
    }

    pub fn flat_get(&self, idx: usize) -> f64 {
        let blocks: [&[f64]; 9] = [
            &self.embedding,
            &self.projection,
            &self.proj_bias,
            &self.heads[0].weight,
            &self.heads[0].bias,
            &self.heads[1].weight,
            &self.heads[1].bias,
            &self.heads[2].weight,
            &self.heads[2].bias,
        ];
        let mut i = idx;
        for block in blocks {
            if i < block.len() {
                return block[i];
            }
            i -= block.len();
        }
        panic!("flat index {idx} out of range");
    }
}

/// A text pair with a similarity label, borrowed for one gradient step.
#[derive(Debug, Clone, Copy)]
pub struct PairExample<'a> {
    pub text_a: &'a str,
    pub text_b: &'a str,
    pub similar: bool,
}

/// One multi-task example: a text with class ids for all three tasks.
#[derive(Debug, Clone, Copy)]
pub struct MtlExample<'a> {
    pub text: &'a str,
    pub labels: [usize; 3],
}

/// Batch shapes accepted by [`gradient`] and [`batch_loss`].
#[derive(Debug, Clone, Copy)]
pub enum GradientBatch<'a> {
    /// Single texts with class ids: cross-entropy (under `task`'s head) and
    /// batch-all triplet (head untouched).
    Labeled {
        task: Task,
        examples: &'a [(&'a str, usize)],
    },
    /// Text pairs: contrastive and online contrastive.
    Pairs(&'a [PairExample<'a>]),
}

/// Mean batch loss and analytic gradients for every parameter, under the
/// configured objective. Contrastive objectives only produce encoder
/// gradients; cross-entropy also fills the task head.
pub fn gradient(
    params: &ModelParams,
    batch: &GradientBatch<'_>,
    loss: &LossConfig,
    dropout: DropoutMode,
) -> Result<(f64, ParamGrads), ModelError> {
    loss.validate()?;
    let mut grads = ParamGrads::zeros(&params.config);
    match (loss.kind, batch) {
        (LossKind::CrossEntropy, GradientBatch::Labeled { task, examples }) => {
            if examples.is_empty() {
                return Err(ObjectiveError::EmptyBatch.into());
            }
            let classes = task.class_count();
            let scale = 1.0 / examples.len() as f64;
            let mut total = 0.0;
            for (k, &(text, label)) in examples.iter().enumerate() {
                if label >= classes {
                    return Err(ObjectiveError::IndexOutOfRange { label, classes }.into());
                }
                let mask = params.dropout_mask(dropout, k as u64);
                let trace = params.encode_traced(text, mask);
                let logits = params.forward_head(&trace.output, *task)?;
                total += objectives::cross_entropy(&logits, label)? * scale;
                let mut dlogits = softmax(&logits);
                dlogits[label] -= 1.0;
                for d in &mut dlogits {
                    *d *= scale;
                }
                let demb = params.backprop_head(*task, &trace.output, &dlogits, &mut grads);
                params.backprop_encoder(&trace, &demb, &mut grads);
            }
            Ok((total, grads))
        }
        (LossKind::Contrastive | LossKind::OnlineContrastive, GradientBatch::Pairs(pairs)) => {
            if pairs.is_empty() {
                return Err(ObjectiveError::EmptyBatch.into());
            }
            let mut traces = Vec::with_capacity(pairs.len());
            let mut distances = Vec::with_capacity(pairs.len());
            let mut pair_grads = Vec::with_capacity(pairs.len());
            for (k, pair) in pairs.iter().enumerate() {
                let mask_a = params.dropout_mask(dropout, 2 * k as u64);
                let mask_b = params.dropout_mask(dropout, 2 * k as u64 + 1);
                let ta = params.encode_traced(pair.text_a, mask_a);
                let tb = params.encode_traced(pair.text_b, mask_b);
                let (d, da, db) = objectives::cosine_distance_with_grad(&ta.output, &tb.output)?;
                traces.push((ta, tb));
                distances.push((d, pair.similar));
                pair_grads.push((da, db));
            }
            let (total, coeffs) = match loss.kind {
                LossKind::Contrastive => objectives::contrastive_terms(&distances, loss.margin),
                _ => objectives::online_contrastive_terms(&distances, loss.margin)?,
            };
            for (((ta, tb), (da, db)), &c) in traces.iter().zip(&pair_grads).zip(&coeffs) {
                if c == 0.0 {
                    continue;
                }
                let ga: Vec<f64> = da.iter().map(|&g| c * g).collect();
                let gb: Vec<f64> = db.iter().map(|&g| c * g).collect();
                params.backprop_encoder(ta, &ga, &mut grads);
                params.backprop_encoder(tb, &gb, &mut grads);
            }
            Ok((total, grads))
        }
        (LossKind::BatchAllTriplet, GradientBatch::Labeled { examples, .. }) => {
            if examples.is_empty() {
                return Err(ObjectiveError::EmptyBatch.into());
            }
            let n = examples.len();
            let mut traces = Vec::with_capacity(n);
            let labels: Vec<usize> = examples.iter().map(|&(_, l)| l).collect();
            for (k, &(text, _)) in examples.iter().enumerate() {
                let mask = params.dropout_mask(dropout, k as u64);
                traces.push(params.encode_traced(text, mask));
            }
            let mut dist = vec![0.0; n * n];
            let mut dist_grads: alloc::collections::BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)> =
                alloc::collections::BTreeMap::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    let (d, di, dj) = objectives::cosine_distance_with_grad(
                        &traces[i].output,
                        &traces[j].output,
                    )?;
                    dist[i * n + j] = d;
                    dist[j * n + i] = d;
                    dist_grads.insert((i, j), (di, dj));
                }
            }
            let terms = objectives::batch_all_terms(
                &labels,
                |i, j| dist[i * n + j],
                loss.margin,
                loss.triplet_epsilon,
                loss.average_all_triplets,
            )?;
            let mut demb = vec![vec![0.0; params.config.out_dim]; n];
            for (&(i, j), &c) in &terms.pair_coeffs {
                if c == 0.0 {
                    continue;
                }
                let (di, dj) = &dist_grads[&(i, j)];
                for (acc, &g) in demb[i].iter_mut().zip(di) {
                    *acc += c * g;
                }
                for (acc, &g) in demb[j].iter_mut().zip(dj) {
                    *acc += c * g;
                }
            }
            for (trace, grad_out) in traces.iter().zip(&demb) {
                params.backprop_encoder(trace, grad_out, &mut grads);
            }
            Ok((terms.loss, grads))
        }
        _ => Err(ModelError::ObjectiveDataMismatch { kind: loss.kind }),
    }
}

/// Forward-only evaluation of the same batch loss that [`gradient`]
/// differentiates, with identical dropout masks for a given mode. This is
/// the function the finite-difference checks probe.
pub fn batch_loss(
    params: &ModelParams,
    batch: &GradientBatch<'_>,
    loss: &LossConfig,
    dropout: DropoutMode,
) -> Result<f64, ModelError> {
    loss.validate()?;
    match (loss.kind, batch) {
        (LossKind::CrossEntropy, GradientBatch::Labeled { task, examples }) => {
            if examples.is_empty() {
                return Err(ObjectiveError::EmptyBatch.into());
            }
            let mut total = 0.0;
            for (k, &(text, label)) in examples.iter().enumerate() {
                let mask = params.dropout_mask(dropout, k as u64);
                let trace = params.encode_traced(text, mask);
                let logits = params.forward_head(&trace.output, *task)?;
                total += objectives::cross_entropy(&logits, label)?;
            }
            Ok(total / examples.len() as f64)
        }
        (LossKind::Contrastive | LossKind::OnlineContrastive, GradientBatch::Pairs(pairs)) => {
            if pairs.is_empty() {
                return Err(ObjectiveError::EmptyBatch.into());
            }
            let mut embeddings = Vec::with_capacity(pairs.len());
            for (k, pair) in pairs.iter().enumerate() {
                let mask_a = params.dropout_mask(dropout, 2 * k as u64);
                let mask_b = params.dropout_mask(dropout, 2 * k as u64 + 1);
                embeddings.push((
                    params.encode_traced(pair.text_a, mask_a).output,
                    params.encode_traced(pair.text_b, mask_b).output,
                    pair.similar,
                ));
            }
            let view: Vec<EmbeddingPair<'_>> = embeddings
                .iter()
                .map(|(a, b, similar)| EmbeddingPair {
                    a,
                    b,
                    similar: *similar,
                })
                .collect();
            let loss_value = match loss.kind {
                LossKind::Contrastive => objectives::contrastive_loss(&view, loss.margin)?,
                _ => objectives::online_contrastive_loss(&view, loss.margin)?,
            };
            Ok(loss_value)
        }
        (LossKind::BatchAllTriplet, GradientBatch::Labeled { examples, .. }) => {
            if examples.is_empty() {
                return Err(ObjectiveError::EmptyBatch.into());
            }
            let labels: Vec<usize> = examples.iter().map(|&(_, l)| l).collect();
            let mut embeddings = Vec::with_capacity(examples.len());
            for (k, &(text, _)) in examples.iter().enumerate() {
                let mask = params.dropout_mask(dropout, k as u64);
                embeddings.push(params.encode_traced(text, mask).output);
            }
            Ok(objectives::batch_all_triplet_loss(
                &embeddings,
                &labels,
                loss.margin,
                loss.triplet_epsilon,
            )?)
        }
        _ => Err(ModelError::ObjectiveDataMismatch { kind: loss.kind }),
    }
}

/// Multi-task batch: weighted sum of per-head cross-entropies, mean over the
/// batch, shared encoder backprop. Heads with zero weight are skipped whole.
pub fn multitask_gradient(
    params: &ModelParams,
    examples: &[MtlExample<'_>],
    weights: [f64; 3],
    dropout: DropoutMode,
) -> Result<(f64, ParamGrads), ModelError> {
    if examples.is_empty() {
        return Err(ObjectiveError::EmptyBatch.into());
    }
    let mut grads = ParamGrads::zeros(&params.config);
    let scale = 1.0 / examples.len() as f64;
    let mut total = 0.0;
    for (k, example) in examples.iter().enumerate() {
        let mask = params.dropout_mask(dropout, k as u64);
        let trace = params.encode_traced(example.text, mask);
        let mut demb = vec![0.0; params.config.out_dim];
        for (slot, task) in [Task::A, Task::B, Task::C].into_iter().enumerate() {
            let w = weights[slot];
            if w == 0.0 {
                continue;
            }
            let label = example.labels[slot];
            let logits = params.forward_head(&trace.output, task)?;
            total += w * objectives::cross_entropy(&logits, label)? * scale;
            let mut dlogits = softmax(&logits);
            dlogits[label] -= 1.0;
            for d in &mut dlogits {
                *d *= w * scale;
            }
            let head_demb = params.backprop_head(task, &trace.output, &dlogits, &mut grads);
            for (acc, d) in demb.iter_mut().zip(head_demb) {
                *acc += d;
            }
        }
        params.backprop_encoder(&trace, &demb, &mut grads);
    }
    Ok((total, grads))
}

/// Forward-only counterpart of [`multitask_gradient`].
pub fn multitask_batch_loss(
    params: &ModelParams,
    examples: &[MtlExample<'_>],
    weights: [f64; 3],
    dropout: DropoutMode,
) -> Result<f64, ModelError> {
    if examples.is_empty() {
        return Err(ObjectiveError::EmptyBatch.into());
    }
    let scale = 1.0 / examples.len() as f64;
    let mut total = 0.0;
    for (k, example) in examples.iter().enumerate() {
        let mask = params.dropout_mask(dropout, k as u64);
        let trace = params.encode_traced(example.text, mask);
        for (slot, task) in [Task::A, Task::B, Task::C].into_iter().enumerate() {
            let w = weights[slot];
            if w == 0.0 {
                continue;
            }
            let logits = params.forward_head(&trace.output, task)?;
            total += w * objectives::cross_entropy(&logits, example.labels[slot])? * scale;
        }
    }
    Ok(total)
}

/// Training metadata stored beside the parameters in a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointMeta {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_metric: f64,
}

/// A versioned, self-describing parameter snapshot.
///
/// Serialized as a text document with named blocks; floats use the shortest
/// decimal form that round-trips exactly, so `decode(encode(p))` reproduces
/// every bit on any platform.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub meta: Option<CheckpointMeta>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointError {
    UnsupportedVersion(String),
    Corrupt(String),
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::UnsupportedVersion(v) => {
                write!(f, "unsupported checkpoint version {v:?}")
            }
            CheckpointError::Corrupt(why) => write!(f, "corrupt checkpoint: {why}"),
        }
    }
}

impl core::error::Error for CheckpointError {}

const BLOCK_NAMES: [&str; 9] = [
    "embedding",
    "projection",
    "proj_bias",
    "head_a_weight",
    "head_a_bias",
    "head_b_weight",
    "head_b_bias",
    "head_c_weight",
    "head_c_bias",
];

impl Checkpoint {
    pub fn new(params: ModelParams, meta: Option<CheckpointMeta>) -> Self {
        Checkpoint { params, meta }
    }

    pub fn encode(&self) -> String {
        let p = &self.params;
        let c = &p.config;
        let mut out = format!("offlang-checkpoint {CHECKPOINT_VERSION}\n");
        out.push_str(&format!(
            "config hash_buckets={} ngram_min={} ngram_max={} embed_dim={} out_dim={} dropout_p={:?} seed={}\n",
            c.hash_buckets, c.ngram_min, c.ngram_max, c.embed_dim, c.out_dim, c.dropout_p, c.seed
        ));
        if let Some(meta) = &self.meta {
            out.push_str(&format!(
                "meta epochs_run={} best_epoch={} best_metric={:?}\n",
                meta.epochs_run, meta.best_epoch, meta.best_metric
            ));
        }
        let blocks = p.flat_blocks();
        let shapes: [(usize, usize); 9] = [
            (c.hash_buckets, c.embed_dim),
            (c.embed_dim, c.out_dim),
            (1, c.out_dim),
            (c.out_dim, 2),
            (1, 2),
            (c.out_dim, 2),
            (1, 2),
            (c.out_dim, 7),
            (1, 7),
        ];
        for ((name, block), (rows, cols)) in BLOCK_NAMES.iter().zip(blocks).zip(shapes) {
            out.push_str(&format!("block {name} {rows} {cols}\n"));
            for row in block.chunks(cols) {
                let mut first = true;
                for v in row {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    out.push_str(&format!("{v:?}"));
                }
                out.push('\n');
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn decode(text: &str) -> Result<Checkpoint, CheckpointError> {
        let corrupt = |why: &str| CheckpointError::Corrupt(why.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| corrupt("empty document"))?;
        match header.strip_prefix("offlang-checkpoint ") {
            Some(v) if v.trim() == "1" => {}
            Some(v) => return Err(CheckpointError::UnsupportedVersion(v.trim().to_string())),
            None => return Err(corrupt("missing checkpoint header")),
        }

        let config_line = lines.next().ok_or_else(|| corrupt("missing config line"))?;
        let body = config_line
            .strip_prefix("config ")
            .ok_or_else(|| corrupt("missing config line"))?;
        let mut config = EncoderConfig::default();
        for field in body.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| corrupt("bad config field"))?;
            let bad = || corrupt("bad config value");
            match key {
                "hash_buckets" => config.hash_buckets = value.parse().map_err(|_| bad())?,
                "ngram_min" => config.ngram_min = value.parse().map_err(|_| bad())?,
                "ngram_max" => config.ngram_max = value.parse().map_err(|_| bad())?,
                "embed_dim" => config.embed_dim = value.parse().map_err(|_| bad())?,
                "out_dim" => config.out_dim = value.parse().map_err(|_| bad())?,
                "dropout_p" => config.dropout_p = value.parse().map_err(|_| bad())?,
                "seed" => config.seed = value.parse().map_err(|_| bad())?,
                _ => return Err(corrupt("unknown config field")),
            }
        }
        config
            .validate()
            .map_err(|_| corrupt("config fails validation"))?;

        let mut cursor = lines.peekable();
        let mut meta = None;
        if let Some(line) = cursor.peek() {
            if let Some(body) = line.strip_prefix("meta ") {
                let mut epochs_run = 0usize;
                let mut best_epoch = 0usize;
                let mut best_metric = 0.0f64;
                for field in body.split_whitespace() {
                    let (key, value) = field
                        .split_once('=')
                        .ok_or_else(|| corrupt("bad meta field"))?;
                    let bad = || corrupt("bad meta value");
                    match key {
                        "epochs_run" => epochs_run = value.parse().map_err(|_| bad())?,
                        "best_epoch" => best_epoch = value.parse().map_err(|_| bad())?,
                        "best_metric" => best_metric = value.parse().map_err(|_| bad())?,
                        _ => return Err(corrupt("unknown meta field")),
                    }
                }
                meta = Some(CheckpointMeta {
                    epochs_run,
                    best_epoch,
                    best_metric,
                });
                cursor.next();
            }
        }

        let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(9);
        for name in BLOCK_NAMES {
            let head = cursor.next().ok_or_else(|| corrupt("missing block"))?;
            let mut parts = head.split_whitespace();
            if parts.next() != Some("block") || parts.next() != Some(name) {
                return Err(corrupt("unexpected block header"));
            }
            let rows: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| corrupt("bad block shape"))?;
            let cols: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| corrupt("bad block shape"))?;
            let mut values = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let row = cursor.next().ok_or_else(|| corrupt("truncated block"))?;
                let mut count = 0usize;
                for field in row.split_whitespace() {
                    let v: f64 = field.parse().map_err(|_| corrupt("unparseable float"))?;
                    if !v.is_finite() {
                        return Err(corrupt("non-finite parameter"));
                    }
                    values.push(v);
                    count += 1;
                }
                if count != cols {
                    return Err(corrupt("row width mismatch"));
                }
            }
            blocks.push(values);
        }
        if cursor.next().map(str::trim) != Some("end") {
            return Err(corrupt("missing end marker"));
        }

        let expected: [usize; 9] = [
            config.hash_buckets * config.embed_dim,
            config.embed_dim * config.out_dim,
            config.out_dim,
            config.out_dim * 2,
            2,
            config.out_dim * 2,
            2,
            config.out_dim * 7,
            7,
        ];
        for (block, want) in blocks.iter().zip(expected) {
            if block.len() != want {
                return Err(corrupt("block size disagrees with config"));
            }
        }
        let mut it = blocks.into_iter();
        let embedding = it.next().unwrap();
        let projection = it.next().unwrap();
        let proj_bias = it.next().unwrap();
        let ha_w = it.next().unwrap();
        let ha_b = it.next().unwrap();
        let hb_w = it.next().unwrap();
        let hb_b = it.next().unwrap();
        let hc_w = it.next().unwrap();
        let hc_b = it.next().unwrap();
        let params = ModelParams {
            config,
            embedding,
            projection,
            proj_bias,
            heads: [
                HeadParams {
                    weight: ha_w,
                    bias: ha_b,
                },
                HeadParams {
                    weight: hb_w,
                    bias: hb_b,
                },
                HeadParams {
                    weight: hc_w,
                    bias: hc_b,
                },
            ],
        };
        Ok(Checkpoint { params, meta })
    }
}
