//! Training and evaluation pipeline for hierarchical offensive-language and
//! hate-speech classification over short social-media texts.
//!
//! The pipeline covers corpus ingestion and balancing, Arabic-aware text
//! normalization, contrastive pair construction, a small trainable text
//! encoder with task-specific heads, four training objectives (cross-entropy,
//! contrastive, online contrastive, batch-all triplet), four training
//! procedures (classification fine-tuning, contrastive fine-tuning, frozen
//! linear probe, multi-task learning), logit-sum ensembling, macro-averaged
//! evaluation, and 2-D PCA projection of embeddings.
//!
//! The crate is `no_std`-compatible (`alloc` required); all file and terminal
//! IO lives in the companion CLI crate. Every sampling or training routine is
//! driven by an explicit seed and reproduces bit-identically across runs and
//! platforms: randomness comes from a self-contained generator ([`rng`]) and
//! float transcendentals are routed through `libm`.

#![no_std]
#![forbid(unsafe_code)]
// index-heavy numeric loops read better with explicit indices
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod evalviz;
pub mod model;
pub mod objectives;
pub mod pairs;
pub mod preprocess;
pub mod rng;
pub mod train;

mod math;

pub use corpus::{Corpus, DistributionReport, LabelA, LabelB, LabelC, Task, TweetRecord};
pub use evalviz::{Metrics, Projection};
pub use model::{Checkpoint, DropoutMode, EncoderConfig, ModelParams, ParamGrads};
pub use objectives::{LossConfig, LossKind};
pub use pairs::{PairDataset, PairPools};
pub use preprocess::{normalize, normalize_corpus, NormalizationConfig, Stage};
pub use train::{TrainConfig, TrainHistory};
