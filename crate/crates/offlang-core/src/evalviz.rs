//! Evaluation and projection: confusion-matrix metrics with macro averaging,
//! majority baselines, logit-sum ensembling, and 2-D PCA of embeddings.
//!
//! Macro averages run over ALL classes of the task, counting zero-support
//! classes as 0 — that convention is what reproduces the all-majority
//! closed form `macro-F1 = (2p/(p+1))/C` for prevalence `p` over `C` classes.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Corpus, Task};
use crate::math;
use crate::model::{DropoutMode, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    LengthMismatch {
        predictions: usize,
        gold: usize,
    },
    EmptyInput,
    ClassOutOfRange {
        id: usize,
        classes: usize,
    },
    EmptyCorpus,
    EmptyEnsemble,
    HeterogeneousHeads,
    /// Data rank below the requested component count (or too few points).
    DegenerateData(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::LengthMismatch { predictions, gold } => {
                write!(f, "{predictions} predictions against {gold} gold labels")
            }
            EvalError::EmptyInput => f.write_str("nothing to evaluate"),
            EvalError::ClassOutOfRange { id, classes } => {
                write!(f, "class id {id} out of range for {classes} classes")
            }
            EvalError::EmptyCorpus => f.write_str("corpus has no records"),
            EvalError::EmptyEnsemble => f.write_str("ensemble needs at least one model"),
            EvalError::HeterogeneousHeads => f.write_str("ensemble heads disagree on class count"),
            EvalError::DegenerateData(why) => write!(f, "degenerate data: {why}"),
        }
    }
}

impl core::error::Error for EvalError {}

/// Precision/recall/F1 and support for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Confusion-matrix-derived metrics; `confusion[gold][predicted]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub classes: usize,
    pub total: usize,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: Vec<Vec<usize>>,
}

/// Standard multi-class evaluation over `classes` classes.
pub fn evaluate(
    predictions: &[usize],
    gold: &[usize],
    classes: usize,
) -> Result<Metrics, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if predictions.is_empty() || classes == 0 {
        return Err(EvalError::EmptyInput);
    }
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&p, &g) in predictions.iter().zip(gold) {
        if p >= classes {
            return Err(EvalError::ClassOutOfRange { id: p, classes });
        }
        if g >= classes {
            return Err(EvalError::ClassOutOfRange { id: g, classes });
        }
        confusion[g][p] += 1;
    }
    let total = predictions.len();
    let mut correct = 0usize;
    let mut per_class = Vec::with_capacity(classes);
    for c in 0..classes {
        let tp = confusion[c][c];
        correct += tp;
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..classes).map(|g| confusion[g][c]).sum();
        let precision = if predicted == 0 {
            0.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = if support == 0 {
            0.0
        } else {
            tp as f64 / support as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let k = classes as f64;
    Ok(Metrics {
        classes,
        total,
        accuracy: correct as f64 / total as f64,
        macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
        per_class,
        confusion,
    })
}

/// Predict the training-majority label (ties to the lower class index) for
/// every evaluation record and score it.
pub fn majority_baseline(train: &Corpus, eval: &Corpus, task: Task) -> Result<Metrics, EvalError> {
    if train.is_empty() || eval.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let classes = task.class_count();
    let mut counts = vec![0usize; classes];
    for r in train.records() {
        counts[r.class_index(task)] += 1;
    }
    let mut majority = 0usize;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[majority] {
            majority = c;
        }
    }
    let predictions = vec![majority; eval.len()];
    let gold: Vec<usize> = eval.records().iter().map(|r| r.class_index(task)).collect();
    evaluate(&predictions, &gold, classes)
}

/// Logit-sum ensemble: per-class sum of raw logits across members, argmax,
/// ties to the lower class index. Invariant under member reordering.
pub fn ensemble_predict(
    models: &[&ModelParams],
    text: &str,
    task: Task,
) -> Result<usize, EvalError> {
    if models.is_empty() {
        return Err(EvalError::EmptyEnsemble);
    }
    let classes = task.class_count();
    if models.iter().any(|m| m.head(task).classes() != classes) {
        return Err(EvalError::HeterogeneousHeads);
    }
    let mut sums = vec![0.0f64; classes];
    for model in models {
        let embedding = model.encode(text, DropoutMode::Eval);
        let logits = model
            .forward_head(&embedding, task)
            .expect("own embedding fits own head");
        for (s, l) in sums.iter_mut().zip(logits) {
            *s += l;
        }
    }
    let mut best = 0usize;
    for (c, &v) in sums.iter().enumerate() {
        if v > sums[best] {
            best = c;
        }
    }
    Ok(best)
}

/// A 2-D (or k-D) PCA of a set of embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Orthonormal principal axes, one `Vec<f64>` of input dimension each.
    pub components: Vec<Vec<f64>>,
    /// Fraction of total variance captured by each component, non-increasing.
    pub explained: Vec<f64>,
    /// Projected coordinates, one row of `components.len()` values per point.
    pub coordinates: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

/// Mean-center the points and project onto the top eigenvectors of the
/// covariance matrix, found by power iteration with Gram-Schmidt deflation.
/// Sign convention: each component's largest-magnitude entry is positive.
pub fn pca_project(
    embeddings: &[Vec<f64>],
    labels: &[&str],
    components: usize,
) -> Result<Projection, EvalError> {
    if embeddings.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: embeddings.len(),
            gold: labels.len(),
        });
    }
    if components == 0 {
        return Err(EvalError::DegenerateData(
            "zero components requested".to_string(),
        ));
    }
    if embeddings.len() < components + 1 {
        return Err(EvalError::DegenerateData(
            "need at least components + 1 points".to_string(),
        ));
    }
    let dim = embeddings[0].len();
    if dim < components || embeddings.iter().any(|e| e.len() != dim) {
        return Err(EvalError::DegenerateData(
            "inconsistent or too-small dimension".to_string(),
        ));
    }
    let n = embeddings.len();

    let mut mean = vec![0.0f64; dim];
    for e in embeddings {
        for (m, &x) in mean.iter_mut().zip(e) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = embeddings
        .iter()
        .map(|e| e.iter().zip(&mean).map(|(&x, &m)| x - m).collect())
        .collect();

    // sample covariance, n-1 denominator
    let denom = (n - 1) as f64;
    let mut cov = vec![0.0f64; dim * dim];
    for row in &centered {
        for i in 0..dim {
            let xi = row[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..dim {
                cov[i * dim + j] += xi * row[j] / denom;
            }
        }
    }
    let total_variance: f64 = (0..dim).map(|i| cov[i * dim + i]).sum();
    if total_variance <= 0.0 {
        return Err(EvalError::DegenerateData("zero total variance".to_string()));
    }

    let mat_vec = |m: &[f64], v: &[f64], out: &mut [f64]| {
        for i in 0..dim {
            let row = &m[i * dim..(i + 1) * dim];
            out[i] = row.iter().zip(v).map(|(&a, &b)| a * b).sum();
        }
    };

    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(components);
    let mut eigenvalues = Vec::with_capacity(components);
    let mut deflated = cov.clone();
    for comp in 0..components {
        // deterministic starts: basis vectors in turn if one stalls
        let mut converged = None;
        'starts: for start in 0..dim {
            let mut v = vec![0.0f64; dim];
            v[(comp + start) % dim] = 1.0;
            orthogonalize(&mut v, &axes);
            if normalize(&mut v) < 1e-12 {
                continue 'starts;
            }
            let mut next = vec![0.0f64; dim];
            for _ in 0..10_000 {
                mat_vec(&deflated, &v, &mut next);
                orthogonalize(&mut next, &axes);
                let norm = normalize(&mut next);
                if norm < 1e-14 {
                    continue 'starts; // start vector lies in the null space
                }
                let delta: f64 = next
                    .iter()
                    .zip(&v)
                    .map(|(&a, &b)| (a - b).abs().min((a + b).abs()))
                    .fold(0.0, f64::max);
                v.copy_from_slice(&next);
                if delta < 1e-13 {
                    break;
                }
            }
            converged = Some(v);
            break;
        }
        let v = converged.ok_or_else(|| {
            EvalError::DegenerateData("power iteration found no direction".to_string())
        })?;
        let mut cv = vec![0.0f64; dim];
        mat_vec(&deflated, &v, &mut cv);
        let lambda: f64 = cv.iter().zip(&v).map(|(&a, &b)| a * b).sum();
        if lambda <= total_variance * 1e-10 {
            return Err(EvalError::DegenerateData(alloc::format!(
                "rank {comp} below requested {components} components"
            )));
        }
        // deflate: cov <- cov - lambda v v^T
        for i in 0..dim {
            for j in 0..dim {
                deflated[i * dim + j] -= lambda * v[i] * v[j];
            }
        }
        eigenvalues.push(lambda);
        axes.push(v);
    }

    // sign convention: largest-magnitude entry positive
    for axis in &mut axes {
        let mut lead = 0usize;
        for (i, &x) in axis.iter().enumerate() {
            if x.abs() > axis[lead].abs() {
                lead = i;
            }
        }
        if axis[lead] < 0.0 {
            for x in axis.iter_mut() {
                *x = -*x;
            }
        }
    }

    let coordinates = centered
        .iter()
        .map(|row| {
            axes.iter()
                .map(|axis| axis.iter().zip(row).map(|(&a, &x)| a * x).sum())
                .collect()
        })
        .collect();
    let explained = eigenvalues.iter().map(|&l| l / total_variance).collect();
    Ok(Projection {
        components: axes,
        explained,
        coordinates,
        labels: labels.iter().map(|&l| l.to_string()).collect(),
    })
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for axis in basis {
        let dot: f64 = axis.iter().zip(v.iter()).map(|(&a, &b)| a * b).sum();
        for (x, &a) in v.iter_mut().zip(axis) {
            *x -= dot * a;
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = math::sqrt(v.iter().map(|&x| x * x).sum());
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tsv;
    use crate::model::{EncoderConfig, ModelParams};
    use crate::rng::Rng;
    use alloc::format;

    #[test]
    fn perfect_predictions_score_one() {
        let gold = [0usize, 1, 2, 1, 0];
        let m = evaluate(&gold, &gold, 3).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_precision, 1.0);
        assert_eq!(m.macro_recall, 1.0);
        assert_eq!(m.macro_f1, 1.0);
        assert_eq!(m.confusion[1][1], 2);
    }

    #[test]
    fn all_majority_binary_prediction_closed_form() {
        // 65.1% prevalence: accuracy .651, macro P .3255, macro R .5,
        // macro F1 = (2p/(p+1))/2
        let mut gold = vec![0usize; 651];
        gold.extend(vec![1usize; 349]);
        let predictions = vec![0usize; 1000];
        let m = evaluate(&predictions, &gold, 2).unwrap();
        assert!((m.accuracy - 0.651).abs() < 1e-12);
        assert!((m.macro_precision - 0.3255).abs() < 1e-12);
        assert!((m.macro_recall - 0.5).abs() < 1e-12);
        let p: f64 = 0.651;
        let closed = (2.0 * p / (p + 1.0)) / 2.0;
        assert!((m.macro_f1 - closed).abs() < 1e-12);
        assert!((m.macro_f1 - 0.394).abs() < 1e-3);
    }

    #[test]
    fn seven_class_majority_macro_f1() {
        let mut gold = vec![0usize; 893];
        for c in 1..7 {
            gold.extend(vec![c; if c == 1 { 27 } else { 16 }]);
        }
        let total = gold.len();
        let m = evaluate(&vec![0usize; total], &gold, 7).unwrap();
        let p = 893.0 / total as f64;
        let closed = (2.0 * p / (p + 1.0)) / 7.0;
        assert!((m.macro_f1 - closed).abs() < 1e-12);
    }

    #[test]
    fn evaluate_validates_input() {
        assert_eq!(
            evaluate(&[0], &[0, 1], 2).unwrap_err(),
            EvalError::LengthMismatch {
                predictions: 1,
                gold: 2
            }
        );
        assert_eq!(evaluate(&[], &[], 2).unwrap_err(), EvalError::EmptyInput);
        assert_eq!(
            evaluate(&[5], &[0], 2).unwrap_err(),
            EvalError::ClassOutOfRange { id: 5, classes: 2 }
        );
    }

    #[test]
    fn confusion_row_and_column_sums() {
        let gold = [0usize, 0, 1, 2, 2, 2, 1];
        let pred = [0usize, 1, 1, 2, 0, 2, 1];
        let m = evaluate(&pred, &gold, 3).unwrap();
        for c in 0..3 {
            let row: usize = m.confusion[c].iter().sum();
            assert_eq!(row, m.per_class[c].support);
            let gold_count = gold.iter().filter(|&&g| g == c).count();
            assert_eq!(row, gold_count);
            let col: usize = (0..3).map(|g| m.confusion[g][c]).sum();
            let pred_count = pred.iter().filter(|&&p| p == c).count();
            assert_eq!(col, pred_count);
        }
    }

    fn tsv_corpus(rows: &[(&str, &str)]) -> Corpus {
        let mut body = String::new();
        for (i, (a, b)) in rows.iter().enumerate() {
            let c = if *b == "HS" { "HS1" } else { "NOT_HS" };
            body.push_str(&format!(
                "r{i}\ttext {i}\t{a}\t{b}\t{c}\tNOT_VLG\tNOT_VIO\n"
            ));
        }
        parse_tsv(&body, false, "t").unwrap()
    }

    #[test]
    fn majority_baseline_predicts_train_majority() {
        let train = tsv_corpus(&[
            ("NOT_OFF", "NOT_HS"),
            ("NOT_OFF", "NOT_HS"),
            ("OFF", "NOT_HS"),
        ]);
        let eval_set = tsv_corpus(&[("NOT_OFF", "NOT_HS"), ("OFF", "NOT_HS")]);
        let m = majority_baseline(&train, &eval_set, Task::A).unwrap();
        // majority NOT_OFF (class 1) predicted everywhere
        assert_eq!(m.confusion[0][1], 1);
        assert_eq!(m.confusion[1][1], 1);
        assert!((m.accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn majority_baseline_degenerate_eval_set() {
        let train = tsv_corpus(&[("OFF", "NOT_HS"), ("OFF", "NOT_HS"), ("NOT_OFF", "NOT_HS")]);
        let eval_set = tsv_corpus(&[("OFF", "NOT_HS"), ("OFF", "NOT_HS")]);
        let m = majority_baseline(&train, &eval_set, Task::A).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!((m.macro_f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn majority_baseline_tie_breaks_to_lower_class() {
        let train = tsv_corpus(&[("OFF", "NOT_HS"), ("NOT_OFF", "NOT_HS")]);
        let eval_set = tsv_corpus(&[("OFF", "NOT_HS")]);
        let m = majority_baseline(&train, &eval_set, Task::A).unwrap();
        // tie resolved to OFF (class 0): the single OFF record is correct
        assert_eq!(m.accuracy, 1.0);
    }

    fn toy_model(seed: u64) -> ModelParams {
        let config = EncoderConfig {
            hash_buckets: 32,
            ngram_min: 2,
            ngram_max: 3,
            embed_dim: 4,
            out_dim: 4,
            dropout_p: 0.0,
            seed,
        };
        ModelParams::init(&config).unwrap()
    }

    /// Zero the task-A head weights and pin its bias, so logits equal the
    /// bias for every input; exercised through the public flat accessors.
    fn rig_head_a_bias(params: &mut ModelParams, bias: [f64; 2]) {
        let c = params.config().clone();
        let head_a_weight = c.hash_buckets * c.embed_dim + c.embed_dim * c.out_dim + c.out_dim;
        let head_a_bias = head_a_weight + c.out_dim * 2;
        for i in head_a_weight..head_a_bias {
            params.flat_set(i, 0.0);
        }
        params.flat_set(head_a_bias, bias[0]);
        params.flat_set(head_a_bias + 1, bias[1]);
    }

    #[test]
    fn ensemble_sums_raw_logits_and_breaks_ties_low() {
        let mut m1 = toy_model(1);
        rig_head_a_bias(&mut m1, [2.0, 1.0]);
        let mut m2 = toy_model(2);
        rig_head_a_bias(&mut m2, [0.0, 3.0]);
        // logits (2,1) + (0,3) sum to (2,4): class 1
        assert_eq!(
            ensemble_predict(&[&m1, &m2], "any text", Task::A).unwrap(),
            1
        );

        let mut m3 = toy_model(3);
        rig_head_a_bias(&mut m3, [1.0, 0.0]);
        let mut m4 = toy_model(4);
        rig_head_a_bias(&mut m4, [0.0, 1.0]);
        // exactly equal sums resolve to class 0
        assert_eq!(
            ensemble_predict(&[&m3, &m4], "any text", Task::A).unwrap(),
            0
        );
    }

    #[test]
    fn ensemble_is_order_invariant_and_single_model_is_argmax() {
        let m1 = toy_model(1);
        let m2 = toy_model(2);
        let m3 = toy_model(3);
        let text = "some tweet text";
        let fwd = ensemble_predict(&[&m1, &m2, &m3], text, Task::A).unwrap();
        let rev = ensemble_predict(&[&m3, &m1, &m2], text, Task::A).unwrap();
        assert_eq!(fwd, rev);
        let single = ensemble_predict(&[&m1], text, Task::A).unwrap();
        assert_eq!(single, m1.predict(text, Task::A));
        assert_eq!(
            ensemble_predict(&[], text, Task::A).unwrap_err(),
            EvalError::EmptyEnsemble
        );
    }

    /// Independent oracle: Jacobi eigenvalue iteration on the covariance.
    fn jacobi_eigs(matrix: &[f64], dim: usize) -> Vec<f64> {
        let mut a = matrix.to_vec();
        for _ in 0..200 {
            let mut off = 0.0f64;
            let mut p = 0;
            let mut q = 1;
            for i in 0..dim {
                for j in (i + 1)..dim {
                    if a[i * dim + j].abs() > off {
                        off = a[i * dim + j].abs();
                        p = i;
                        q = j;
                    }
                }
            }
            if off < 1e-14 {
                break;
            }
            let app = a[p * dim + p];
            let aqq = a[q * dim + q];
            let apq = a[p * dim + q];
            let theta = 0.5 * libm::atan2(2.0 * apq, aqq - app);
            let c = libm::cos(theta);
            let s = libm::sin(theta);
            for k in 0..dim {
                let akp = a[k * dim + p];
                let akq = a[k * dim + q];
                a[k * dim + p] = c * akp - s * akq;
                a[k * dim + q] = s * akp + c * akq;
            }
            for k in 0..dim {
                let apk = a[p * dim + k];
                let aqk = a[q * dim + k];
                a[p * dim + k] = c * apk - s * aqk;
                a[q * dim + k] = s * apk + c * aqk;
            }
        }
        let mut eigs: Vec<f64> = (0..dim).map(|i| a[i * dim + i]).collect();
        eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        eigs
    }

    #[test]
    fn collinear_points_explain_everything_on_one_axis() {
        let points: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64, 2.0 * i as f64, -i as f64])
            .collect();
        let labels: Vec<&str> = (0..6).map(|_| "x").collect();
        let p = pca_project(&points, &labels, 1).unwrap();
        assert!((p.explained[0] - 1.0).abs() < 1e-10);
        // the same data cannot support two components
        assert!(matches!(
            pca_project(&points, &labels, 2),
            Err(EvalError::DegenerateData(_))
        ));
    }

    #[test]
    fn mirrored_points_project_to_negatives() {
        let base = vec![
            vec![1.0, 0.5, -0.25],
            vec![-1.0, -0.5, 0.25],
            vec![2.0, -0.75, 0.5],
            vec![-2.0, 0.75, -0.5],
        ];
        let labels = ["a", "a", "b", "b"];
        let p = pca_project(&base, &labels, 2).unwrap();
        for k in 0..2 {
            let x = &p.coordinates[2 * k];
            let y = &p.coordinates[2 * k + 1];
            for (a, b) in x.iter().zip(y) {
                assert!((a + b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn random_cloud_matches_jacobi_oracle_and_is_orthonormal() {
        let mut rng = Rng::seed_from(42);
        let dim = 8;
        let points: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
            .collect();
        let labels: Vec<&str> = (0..50).map(|_| "p").collect();
        let p = pca_project(&points, &labels, 2).unwrap();

        for i in 0..2 {
            let norm: f64 = p.components[i].iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-10);
            for j in (i + 1)..2 {
                let dot: f64 = p.components[i]
                    .iter()
                    .zip(&p.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                assert!(dot.abs() < 1e-10, "components not orthogonal: {dot}");
            }
        }

        // oracle: covariance eigenvalues via Jacobi
        let n = points.len();
        let mut mean = vec![0.0f64; dim];
        for pt in &points {
            for (m, &x) in mean.iter_mut().zip(pt) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut cov = vec![0.0f64; dim * dim];
        for pt in &points {
            for i in 0..dim {
                for j in 0..dim {
                    cov[i * dim + j] += (pt[i] - mean[i]) * (pt[j] - mean[j]) / (n - 1) as f64;
                }
            }
        }
        let eigs = jacobi_eigs(&cov, dim);
        let total: f64 = (0..dim).map(|i| cov[i * dim + i]).sum();
        assert!((p.explained[0] - eigs[0] / total).abs() < 1e-9);
        assert!((p.explained[1] - eigs[1] / total).abs() < 1e-9);
        assert!(p.explained[0] >= p.explained[1]);
    }

    #[test]
    fn projection_is_translation_invariant() {
        let mut rng = Rng::seed_from(7);
        let points: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..4).map(|_| rng.next_f64()).collect())
            .collect();
        let shifted: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.iter().map(|&x| x + 3.25).collect())
            .collect();
        let labels: Vec<&str> = (0..12).map(|_| "l").collect();
        let a = pca_project(&points, &labels, 2).unwrap();
        let b = pca_project(&shifted, &labels, 2).unwrap();
        for (ra, rb) in a.coordinates.iter().zip(&b.coordinates) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
