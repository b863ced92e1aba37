//! Training objectives: softmax cross-entropy plus three margin-based
//! objectives over cosine distance — classic contrastive, online contrastive
//! (hard-pair mining), and batch-all triplet.
//!
//! Reductions are part of the contract here: contrastive averages over the
//! batch, online contrastive sums over the selected hard pairs (selection
//! size varies per batch, a mean would distort hard-pair weighting), and
//! batch-all averages over active triplets only.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Objective selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    CrossEntropy,
    Contrastive,
    OnlineContrastive,
    BatchAllTriplet,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::CrossEntropy => "ce",
            LossKind::Contrastive => "contrastive",
            LossKind::OnlineContrastive => "online-contrastive",
            LossKind::BatchAllTriplet => "batch-all",
        }
    }

    pub fn parse(s: &str) -> Option<LossKind> {
        match s {
            "ce" | "cross_entropy" | "cross-entropy" => Some(LossKind::CrossEntropy),
            "contrastive" => Some(LossKind::Contrastive),
            "online-contrastive" | "online_contrastive" => Some(LossKind::OnlineContrastive),
            "batch-all" | "batch_all" | "batch_all_triplet" => Some(LossKind::BatchAllTriplet),
            _ => None,
        }
    }
}

/// Distance metric for the pairwise and triplet objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    #[default]
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    pub kind: LossKind,
    pub margin: f64,
    pub distance: Distance,
    pub triplet_epsilon: f64,
    /// Average batch-all over all valid triplets instead of active ones.
    pub average_all_triplets: bool,
}

impl LossConfig {
    pub fn new(kind: LossKind) -> Self {
        LossConfig {
            kind,
            margin: 0.7,
            distance: Distance::Cosine,
            triplet_epsilon: 1e-16,
            average_all_triplets: false,
        }
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        if self.margin.is_nan() || self.margin <= 0.0 || self.margin > 2.0 {
            return Err(ObjectiveError::InvalidMargin(self.margin));
        }
        if self.triplet_epsilon.is_nan() || self.triplet_epsilon < 0.0 {
            return Err(ObjectiveError::InvalidEpsilon(self.triplet_epsilon));
        }
        Ok(())
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig::new(LossKind::CrossEntropy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveError {
    ZeroVector,
    LengthMismatch {
        left: usize,
        right: usize,
    },
    IndexOutOfRange {
        label: usize,
        classes: usize,
    },
    EmptyBatch,
    /// Online contrastive needs at least one similar and one dissimilar pair.
    MissingClassPairs,
    /// Batch-all needs an anchor-positive pair plus a differently labeled example.
    NoValidTriplet,
    InvalidMargin(f64),
    InvalidEpsilon(f64),
    UnknownKind(String),
}

impl fmt::Display for ObjectiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveError::ZeroVector => f.write_str("cosine distance undefined for zero vector"),
            ObjectiveError::LengthMismatch { left, right } => {
                write!(f, "vector lengths differ: {left} vs {right}")
            }
            ObjectiveError::IndexOutOfRange { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            ObjectiveError::EmptyBatch => f.write_str("batch is empty"),
            ObjectiveError::MissingClassPairs => {
                f.write_str("batch needs at least one similar and one dissimilar pair")
            }
            ObjectiveError::NoValidTriplet => f.write_str("batch contains no valid triplet"),
            ObjectiveError::InvalidMargin(m) => {
                write!(f, "margin {m} outside (0, 2] for cosine distance")
            }
            ObjectiveError::InvalidEpsilon(e) => write!(f, "triplet epsilon {e} must be >= 0"),
            ObjectiveError::UnknownKind(s) => write!(f, "unknown objective {s:?}"),
        }
    }
}

impl core::error::Error for ObjectiveError {}

/// A pair of embeddings with a similarity label.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingPair<'a> {
    pub a: &'a [f64],
    pub b: &'a [f64],
    pub similar: bool,
}

/// Cosine distance `1 - u.v / (|u||v|)`, clamped into [0, 2].
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64, ObjectiveError> {
    if u.len() != v.len() {
        return Err(ObjectiveError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&x, &y) in u.iter().zip(v) {
        dot += x * y;
        nu += x * x;
        nv += y * y;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(ObjectiveError::ZeroVector);
    }
    let d = 1.0 - dot / (math::sqrt(nu) * math::sqrt(nv));
    Ok(d.clamp(0.0, 2.0))
}

/// Cosine distance plus its gradient with respect to both inputs.
pub(crate) fn cosine_distance_with_grad(
    u: &[f64],
    v: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>), ObjectiveError> {
    if u.len() != v.len() {
        return Err(ObjectiveError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut nu2 = 0.0;
    let mut nv2 = 0.0;
    for (&x, &y) in u.iter().zip(v) {
        dot += x * y;
        nu2 += x * x;
        nv2 += y * y;
    }
    if nu2 == 0.0 || nv2 == 0.0 {
        return Err(ObjectiveError::ZeroVector);
    }
    let nu = math::sqrt(nu2);
    let nv = math::sqrt(nv2);
    let cos = dot / (nu * nv);
    let d = (1.0 - cos).clamp(0.0, 2.0);
    // dd/du_i = cos * u_i / |u|^2 - v_i / (|u||v|), symmetrically for v
    let inv_nunv = 1.0 / (nu * nv);
    let du: Vec<f64> = u
        .iter()
        .zip(v)
        .map(|(&x, &y)| cos * x / nu2 - y * inv_nunv)
        .collect();
    let dv: Vec<f64> = u
        .iter()
        .zip(v)
        .map(|(&x, &y)| cos * y / nv2 - x * inv_nunv)
        .collect();
    Ok((d, du, dv))
}

/// `-log softmax(logits)[label]`, computed with the max-shift trick.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64, ObjectiveError> {
    if label >= logits.len() {
        return Err(ObjectiveError::IndexOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &l| m.max(l));
    let z: f64 = logits.iter().map(|&l| math::exp(l - max)).sum();
    Ok((max - logits[label]) + math::ln(z))
}

/// Softmax probabilities, shared by the loss and its gradient.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &l| m.max(l));
    let exps: Vec<f64> = logits.iter().map(|&l| math::exp(l - max)).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Per-pair loss terms and d(loss)/d(distance) coefficients for the classic
/// contrastive objective, mean reduction included in the coefficients.
pub(crate) fn contrastive_terms(distances: &[(f64, bool)], margin: f64) -> (f64, Vec<f64>) {
    let scale = 1.0 / distances.len() as f64;
    let mut loss = 0.0;
    let mut coeffs = Vec::with_capacity(distances.len());
    for &(d, similar) in distances {
        if similar {
            loss += d * d * scale;
            coeffs.push(2.0 * d * scale);
        } else {
            let hinge = margin - d;
            if hinge > 0.0 {
                loss += hinge * hinge * scale;
                coeffs.push(-2.0 * hinge * scale);
            } else {
                coeffs.push(0.0);
            }
        }
    }
    (loss, coeffs)
}

/// Hard-pair selection and loss terms for online contrastive: positives
/// farther than the closest negative, negatives closer than the farthest
/// positive; sum reduction over the selection.
pub(crate) fn online_contrastive_terms(
    distances: &[(f64, bool)],
    margin: f64,
) -> Result<(f64, Vec<f64>), ObjectiveError> {
    let mut min_neg = f64::INFINITY;
    let mut max_pos = f64::NEG_INFINITY;
    let mut has_pos = false;
    let mut has_neg = false;
    for &(d, similar) in distances {
        if similar {
            has_pos = true;
            max_pos = max_pos.max(d);
        } else {
            has_neg = true;
            min_neg = min_neg.min(d);
        }
    }
    if !has_pos || !has_neg {
        return Err(ObjectiveError::MissingClassPairs);
    }
    let mut loss = 0.0;
    let mut coeffs = Vec::with_capacity(distances.len());
    for &(d, similar) in distances {
        if similar && d > min_neg {
            loss += d * d;
            coeffs.push(2.0 * d);
        } else if !similar && d < max_pos {
            let hinge = margin - d;
            if hinge > 0.0 {
                loss += hinge * hinge;
                coeffs.push(-2.0 * hinge);
            } else {
                coeffs.push(0.0);
            }
        } else {
            coeffs.push(0.0);
        }
    }
    Ok((loss, coeffs))
}

/// Batch-all triplet terms over a precomputed symmetric distance, returning
/// the loss and d(loss)/d(distance) coefficients keyed by index pair (i < j).
pub(crate) struct TripletTerms {
    pub loss: f64,
    pub pair_coeffs: BTreeMap<(usize, usize), f64>,
}

pub(crate) fn batch_all_terms(
    labels: &[usize],
    distance: impl Fn(usize, usize) -> f64,
    margin: f64,
    epsilon: f64,
    average_all: bool,
) -> Result<TripletTerms, ObjectiveError> {
    let n = labels.len();
    let key = |i: usize, j: usize| if i < j { (i, j) } else { (j, i) };
    // first pass: count, so the averaging denominator is known up front
    let mut valid = 0u64;
    let mut active = 0u64;
    for anchor in 0..n {
        for positive in 0..n {
            if anchor == positive || labels[anchor] != labels[positive] {
                continue;
            }
            for negative in 0..n {
                if labels[negative] == labels[anchor] {
                    continue;
                }
                valid += 1;
                let l = distance(anchor, positive) - distance(anchor, negative) + margin;
                if l > epsilon {
                    active += 1;
                }
            }
        }
    }
    if valid == 0 {
        return Err(ObjectiveError::NoValidTriplet);
    }
    let denom = if average_all { valid } else { active };
    if denom == 0 {
        return Ok(TripletTerms {
            loss: 0.0,
            pair_coeffs: BTreeMap::new(),
        });
    }
    let scale = 1.0 / denom as f64;
    let mut loss = 0.0;
    let mut pair_coeffs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for anchor in 0..n {
        for positive in 0..n {
            if anchor == positive || labels[anchor] != labels[positive] {
                continue;
            }
            for negative in 0..n {
                if labels[negative] == labels[anchor] {
                    continue;
                }
                let l = distance(anchor, positive) - distance(anchor, negative) + margin;
                if l > epsilon {
                    loss += l * scale;
                    *pair_coeffs.entry(key(anchor, positive)).or_insert(0.0) += scale;
                    *pair_coeffs.entry(key(anchor, negative)).or_insert(0.0) -= scale;
                }
            }
        }
    }
    Ok(TripletTerms { loss, pair_coeffs })
}

/// Mean contrastive loss over a batch of labeled pairs.
pub fn contrastive_loss(pairs: &[EmbeddingPair<'_>], margin: f64) -> Result<f64, ObjectiveError> {
    if pairs.is_empty() {
        return Err(ObjectiveError::EmptyBatch);
    }
    let distances = pair_distances(pairs)?;
    Ok(contrastive_terms(&distances, margin).0)
}

/// Online contrastive loss: contrastive terms summed over the hard pairs.
pub fn online_contrastive_loss(
    pairs: &[EmbeddingPair<'_>],
    margin: f64,
) -> Result<f64, ObjectiveError> {
    if pairs.is_empty() {
        return Err(ObjectiveError::EmptyBatch);
    }
    let distances = pair_distances(pairs)?;
    Ok(online_contrastive_terms(&distances, margin)?.0)
}

fn pair_distances(pairs: &[EmbeddingPair<'_>]) -> Result<Vec<(f64, bool)>, ObjectiveError> {
    pairs
        .iter()
        .map(|p| Ok((cosine_distance(p.a, p.b)?, p.similar)))
        .collect()
}

/// Batch-all triplet loss: mean hinge over all valid (anchor, positive,
/// negative) triplets whose loss exceeds `epsilon`.
pub fn batch_all_triplet_loss(
    embeddings: &[Vec<f64>],
    labels: &[usize],
    margin: f64,
    epsilon: f64,
) -> Result<f64, ObjectiveError> {
    if embeddings.len() != labels.len() {
        return Err(ObjectiveError::LengthMismatch {
            left: embeddings.len(),
            right: labels.len(),
        });
    }
    let n = embeddings.len();
    let mut dist = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cosine_distance(&embeddings[i], &embeddings[j])?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let terms = batch_all_terms(labels, |i, j| dist[i * n + j], margin, epsilon, false)?;
    Ok(terms.loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    const MARGIN: f64 = 0.7;

    /// Unit vector at angle theta; cosine distance between `unit(0)` and
    /// `unit(theta)` is `1 - cos(theta)`.
    fn unit(theta: f64) -> Vec<f64> {
        vec![libm::cos(theta), libm::sin(theta)]
    }

    /// Pair of embeddings at an exact cosine distance from each other.
    fn pair_at(distance: f64, similar: bool) -> (Vec<f64>, Vec<f64>, bool) {
        (unit(0.0), unit(libm::acos(1.0 - distance)), similar)
    }

    fn as_pairs(owned: &[(Vec<f64>, Vec<f64>, bool)]) -> Vec<EmbeddingPair<'_>> {
        owned
            .iter()
            .map(|(a, b, similar)| EmbeddingPair {
                a,
                b,
                similar: *similar,
            })
            .collect()
    }

    #[test]
    fn loss_config_validates_margin_and_epsilon() {
        let mut config = LossConfig::new(LossKind::Contrastive);
        assert!(config.validate().is_ok());
        config.margin = 0.0;
        assert!(matches!(
            config.validate(),
            Err(ObjectiveError::InvalidMargin(_))
        ));
        config.margin = 2.5;
        assert!(matches!(
            config.validate(),
            Err(ObjectiveError::InvalidMargin(_))
        ));
        config.margin = 2.0;
        config.triplet_epsilon = -1.0;
        assert!(matches!(
            config.validate(),
            Err(ObjectiveError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn cosine_distance_identity_orthogonal_opposite() {
        let u = vec![0.3, -0.2, 0.9];
        assert!(cosine_distance(&u, &u).unwrap().abs() < 1e-12);
        let x = vec![1.0, 0.0];
        let y = vec![0.0, 2.0];
        assert!((cosine_distance(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        assert!((cosine_distance(&u, &neg).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_distance_rejects_zero_and_mismatch() {
        assert_eq!(
            cosine_distance(&[0.0, 0.0], &[1.0, 0.0]).unwrap_err(),
            ObjectiveError::ZeroVector
        );
        assert_eq!(
            cosine_distance(&[1.0], &[1.0, 0.0]).unwrap_err(),
            ObjectiveError::LengthMismatch { left: 1, right: 2 }
        );
    }

    #[test]
    fn cross_entropy_known_values() {
        let ln2 = math::ln(2.0);
        assert!((cross_entropy(&[0.0, 0.0], 0).unwrap() - ln2).abs() < 1e-15);
        // direct-evaluation oracle: ln(1 + e^-20)
        let oracle = math::ln(1.0 + math::exp(-20.0));
        let loss = cross_entropy(&[10.0, -10.0], 0).unwrap();
        assert!((loss - oracle).abs() <= 1e-18, "{loss} vs {oracle}");
        assert!((loss - 2.0611536181902037e-9).abs() < 1e-15);
        let ln7 = math::ln(7.0);
        assert!((cross_entropy(&[0.0; 7], 3).unwrap() - ln7).abs() < 1e-15);
        assert_eq!(
            cross_entropy(&[0.0, 0.0], 2).unwrap_err(),
            ObjectiveError::IndexOutOfRange {
                label: 2,
                classes: 2
            }
        );
    }

    #[test]
    fn contrastive_loss_cases() {
        let same = vec![(unit(0.3), unit(0.3), true)];
        assert_eq!(contrastive_loss(&as_pairs(&same), MARGIN).unwrap(), 0.0);

        let close_negative = vec![(unit(0.3), unit(0.3), false)];
        let loss = contrastive_loss(&as_pairs(&close_negative), MARGIN).unwrap();
        assert!((loss - MARGIN * MARGIN).abs() < 1e-12, "{loss}");

        let far_negative = vec![pair_at(0.9, false)];
        assert_eq!(
            contrastive_loss(&as_pairs(&far_negative), MARGIN).unwrap(),
            0.0
        );

        assert_eq!(
            contrastive_loss(&[], MARGIN).unwrap_err(),
            ObjectiveError::EmptyBatch
        );
    }

    #[test]
    fn online_contrastive_separated_batch_is_zero() {
        let batch = vec![pair_at(0.1, true), pair_at(0.9, false)];
        assert_eq!(
            online_contrastive_loss(&as_pairs(&batch), MARGIN).unwrap(),
            0.0
        );
    }

    #[test]
    fn online_contrastive_hand_enumerated_selection() {
        // P = {0.2, 0.8}, N = {0.5, 0.95}: hard positives {0.8}, hard
        // negatives {0.5}; loss = 0.8^2 + (0.7-0.5)^2 = 0.68
        let batch = vec![
            pair_at(0.2, true),
            pair_at(0.8, true),
            pair_at(0.5, false),
            pair_at(0.95, false),
        ];
        let loss = online_contrastive_loss(&as_pairs(&batch), MARGIN).unwrap();
        assert!((loss - 0.68).abs() < 1e-9, "{loss}");
    }

    #[test]
    fn online_contrastive_sum_reduction_doubles_on_duplication() {
        let batch = vec![pair_at(0.6, true), pair_at(0.4, false), pair_at(0.3, false)];
        let once = online_contrastive_loss(&as_pairs(&batch), MARGIN).unwrap();
        let mut doubled = batch.clone();
        doubled.extend(batch.clone());
        let twice = online_contrastive_loss(&as_pairs(&doubled), MARGIN).unwrap();
        assert!((twice - 2.0 * once).abs() < 1e-12);
        assert!(once > 0.0);
    }

    #[test]
    fn online_contrastive_requires_both_pair_kinds() {
        let only_pos = vec![pair_at(0.2, true)];
        assert_eq!(
            online_contrastive_loss(&as_pairs(&only_pos), MARGIN).unwrap_err(),
            ObjectiveError::MissingClassPairs
        );
    }

    /// Independent brute-force oracle: naive cosine + full triple loop.
    fn triplet_oracle(
        embeddings: &[Vec<f64>],
        labels: &[usize],
        margin: f64,
        epsilon: f64,
    ) -> Option<f64> {
        let cos = |u: &[f64], v: &[f64]| {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            let nu: f64 = libm::sqrt(u.iter().map(|a| a * a).sum());
            let nv: f64 = libm::sqrt(v.iter().map(|a| a * a).sum());
            (1.0 - dot / (nu * nv)).clamp(0.0, 2.0)
        };
        let n = labels.len();
        let mut sum = 0.0;
        let mut active = 0u64;
        let mut valid = 0u64;
        for a in 0..n {
            for p in 0..n {
                for g in 0..n {
                    if a == p || labels[a] != labels[p] || labels[g] == labels[a] {
                        continue;
                    }
                    valid += 1;
                    let l = cos(&embeddings[a], &embeddings[p])
                        - cos(&embeddings[a], &embeddings[g])
                        + margin;
                    if l > epsilon {
                        sum += l;
                        active += 1;
                    }
                }
            }
        }
        if valid == 0 {
            None
        } else if active == 0 {
            Some(0.0)
        } else {
            Some(sum / active as f64)
        }
    }

    #[test]
    fn batch_all_enumerates_expected_triplets() {
        let labels = vec![1usize, 1, 0, 0];
        let embeddings = vec![unit(0.1), unit(0.4), unit(1.3), unit(2.0)];
        let n = labels.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] = cosine_distance(&embeddings[i], &embeddings[j]).unwrap();
                }
            }
        }
        let terms = batch_all_terms(&labels, |i, j| dist[i * n + j], MARGIN, 1e-16, false).unwrap();
        // 2 ordered (anchor, positive) pairs per class x 2 negatives each
        let mut valid = 0;
        for a in 0..n {
            for p in 0..n {
                for g in 0..n {
                    if a != p && labels[a] == labels[p] && labels[g] != labels[a] {
                        valid += 1;
                    }
                }
            }
        }
        assert_eq!(valid, 8);
        let oracle = triplet_oracle(&embeddings, &labels, MARGIN, 1e-16).unwrap();
        assert!((terms.loss - oracle).abs() < 1e-12);
    }

    #[test]
    fn batch_all_inactive_when_well_separated() {
        // positives identical, negative opposite: d(a,p)=0, d(a,n)=2 > margin
        let embeddings = vec![unit(0.0), unit(0.0), unit(core::f64::consts::PI)];
        let labels = vec![0usize, 0, 1];
        let loss = batch_all_triplet_loss(&embeddings, &labels, MARGIN, 1e-16).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn batch_all_requires_valid_triplets() {
        let embeddings = vec![unit(0.1), unit(0.7)];
        let labels = vec![0usize, 1];
        assert_eq!(
            batch_all_triplet_loss(&embeddings, &labels, MARGIN, 1e-16).unwrap_err(),
            ObjectiveError::NoValidTriplet
        );
    }

    fn small_batch() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
        let emb = prop::collection::vec(-1.0f64..1.0, 3);
        prop::collection::vec((emb, 0usize..3), 3..=8).prop_filter_map(
            "needs a valid triplet and nonzero vectors",
            |items| {
                let (embeddings, labels): (Vec<Vec<f64>>, Vec<usize>) = items.into_iter().unzip();
                if embeddings.iter().any(|e| e.iter().all(|&x| x == 0.0)) {
                    return None;
                }
                let has_pair = labels.iter().enumerate().any(|(i, &l)| {
                    labels.iter().skip(i + 1).any(|&m| m == l) && labels.iter().any(|&m| m != l)
                });
                has_pair.then_some((embeddings, labels))
            },
        )
    }

    proptest! {
        #[test]
        fn batch_all_matches_brute_force((embeddings, labels) in small_batch()) {
            let loss = batch_all_triplet_loss(&embeddings, &labels, MARGIN, 1e-16).unwrap();
            let oracle = triplet_oracle(&embeddings, &labels, MARGIN, 1e-16).unwrap();
            prop_assert!((loss - oracle).abs() < 1e-12);
            prop_assert!(loss >= 0.0);
        }

        #[test]
        fn losses_are_scale_invariant(
            (embeddings, labels) in small_batch(),
            scale in 0.1f64..10.0,
        ) {
            let scaled: Vec<Vec<f64>> = embeddings
                .iter()
                .map(|e| e.iter().map(|&x| x * scale).collect())
                .collect();
            let a = batch_all_triplet_loss(&embeddings, &labels, MARGIN, 1e-16).unwrap();
            let b = batch_all_triplet_loss(&scaled, &labels, MARGIN, 1e-16).unwrap();
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);

            let owned: Vec<(Vec<f64>, Vec<f64>, bool)> = embeddings
                .windows(2)
                .enumerate()
                .map(|(i, w)| (w[0].clone(), w[1].clone(), i % 2 == 0))
                .collect();
            let scaled_pairs: Vec<(Vec<f64>, Vec<f64>, bool)> = owned
                .iter()
                .map(|(a, b, s)| {
                    (
                        a.iter().map(|&x| x * scale).collect(),
                        b.iter().map(|&x| x * scale).collect(),
                        *s,
                    )
                })
                .collect();
            let pa = contrastive_loss(&as_pairs(&owned), MARGIN).unwrap();
            let pb = contrastive_loss(&as_pairs(&scaled_pairs), MARGIN).unwrap();
            prop_assert!((pa - pb).abs() < 1e-9);
            prop_assert!(pa >= 0.0);
            if owned.iter().any(|(_, _, s)| *s) && owned.iter().any(|(_, _, s)| !*s) {
                let oa = online_contrastive_loss(&as_pairs(&owned), MARGIN).unwrap();
                let ob = online_contrastive_loss(&as_pairs(&scaled_pairs), MARGIN).unwrap();
                prop_assert!((oa - ob).abs() < 1e-9);
                prop_assert!(oa >= 0.0);
            }
        }

        #[test]
        fn cross_entropy_nonnegative(
            logits in prop::collection::vec(-30.0f64..30.0, 2..8),
            pick in 0usize..8,
        ) {
            let label = pick % logits.len();
            let loss = cross_entropy(&logits, label).unwrap();
            prop_assert!(loss >= 0.0);
        }
    }
}
