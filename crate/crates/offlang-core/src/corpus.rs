//! Labeled tweet corpora: ingestion, label hierarchy, distribution
//! statistics, and undersampling-based balancing.
//!
//! Records carry three hierarchical labels (offensive / hate speech /
//! hate-speech class) plus vulgarity and violence flags. The TSV codec here
//! is string-level; file IO lives in the CLI crate.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rng::Rng;

/// The three classification sub-tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    A,
    B,
    C,
}

impl Task {
    pub fn class_count(self) -> usize {
        match self {
            Task::A | Task::B => 2,
            Task::C => 7,
        }
    }

    /// Label tokens in class-index order.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Task::A => &["OFF", "NOT_OFF"],
            Task::B => &["HS", "NOT_HS"],
            Task::C => &["NOT_HS", "HS1", "HS2", "HS3", "HS4", "HS5", "HS6"],
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        match s {
            "A" | "a" => Some(Task::A),
            "B" | "b" => Some(Task::B),
            "C" | "c" => Some(Task::C),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::A => "A",
            Task::B => "B",
            Task::C => "C",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sub-task A: offensive or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelA {
    Off,
    NotOff,
}

/// Sub-task B: hate speech or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelB {
    Hs,
    NotHs,
}

/// Sub-task C: fine-grained hate-speech class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelC {
    NotHs,
    Hs1,
    Hs2,
    Hs3,
    Hs4,
    Hs5,
    Hs6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vulgar {
    Vlg,
    NotVlg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violent {
    Vio,
    NotVio,
}

impl LabelA {
    pub fn token(self) -> &'static str {
        match self {
            LabelA::Off => "OFF",
            LabelA::NotOff => "NOT_OFF",
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        match s {
            "OFF" => Some(LabelA::Off),
            "NOT_OFF" => Some(LabelA::NotOff),
            _ => None,
        }
    }

    pub fn class_index(self) -> usize {
        match self {
            LabelA::Off => 0,
            LabelA::NotOff => 1,
        }
    }
}

impl LabelB {
    pub fn token(self) -> &'static str {
        match self {
            LabelB::Hs => "HS",
            LabelB::NotHs => "NOT_HS",
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        match s {
            "HS" => Some(LabelB::Hs),
            "NOT_HS" => Some(LabelB::NotHs),
            _ => None,
        }
    }

    pub fn class_index(self) -> usize {
        match self {
            LabelB::Hs => 0,
            LabelB::NotHs => 1,
        }
    }
}

impl LabelC {
    pub fn token(self) -> &'static str {
        match self {
            LabelC::NotHs => "NOT_HS",
            LabelC::Hs1 => "HS1",
            LabelC::Hs2 => "HS2",
            LabelC::Hs3 => "HS3",
            LabelC::Hs4 => "HS4",
            LabelC::Hs5 => "HS5",
            LabelC::Hs6 => "HS6",
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        match s {
            "NOT_HS" => Some(LabelC::NotHs),
            "HS1" => Some(LabelC::Hs1),
            "HS2" => Some(LabelC::Hs2),
            "HS3" => Some(LabelC::Hs3),
            "HS4" => Some(LabelC::Hs4),
            "HS5" => Some(LabelC::Hs5),
            "HS6" => Some(LabelC::Hs6),
            _ => None,
        }
    }

    pub fn class_index(self) -> usize {
        match self {
            LabelC::NotHs => 0,
            LabelC::Hs1 => 1,
            LabelC::Hs2 => 2,
            LabelC::Hs3 => 3,
            LabelC::Hs4 => 4,
            LabelC::Hs5 => 5,
            LabelC::Hs6 => 6,
        }
    }
}

impl Vulgar {
    pub fn token(self) -> &'static str {
        match self {
            Vulgar::Vlg => "VLG",
            Vulgar::NotVlg => "NOT_VLG",
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        match s {
            "VLG" => Some(Vulgar::Vlg),
            "NOT_VLG" => Some(Vulgar::NotVlg),
            _ => None,
        }
    }
}

impl Violent {
    pub fn token(self) -> &'static str {
        match self {
            Violent::Vio => "VIO",
            Violent::NotVio => "NOT_VIO",
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        match s {
            "VIO" => Some(Violent::Vio),
            "NOT_VIO" => Some(Violent::NotVio),
            _ => None,
        }
    }
}

/// One labeled tweet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub label_a: LabelA,
    pub label_b: LabelB,
    pub label_c: LabelC,
    pub vulgar: Vulgar,
    pub violent: Violent,
}

impl TweetRecord {
    /// Class index of this record under the given task.
    pub fn class_index(&self, task: Task) -> usize {
        match task {
            Task::A => self.label_a.class_index(),
            Task::B => self.label_b.class_index(),
            Task::C => self.label_c.class_index(),
        }
    }

    /// Label token of this record under the given task.
    pub fn label_token(&self, task: Task) -> &'static str {
        match task {
            Task::A => self.label_a.token(),
            Task::B => self.label_b.token(),
            Task::C => self.label_c.token(),
        }
    }
}

/// An ordered collection of records with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<TweetRecord>,
    source_tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    MalformedRow {
        line: usize,
        columns: usize,
    },
    UnknownLabel {
        line: usize,
        column: &'static str,
        token: String,
    },
    DuplicateId {
        id: String,
    },
    EmptyCorpus,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::MalformedRow { line, columns } => {
                write!(
                    f,
                    "line {line}: expected 7 tab-separated columns, found {columns}"
                )
            }
            CorpusError::UnknownLabel {
                line,
                column,
                token,
            } => {
                write!(f, "line {line}: unknown {column} label {token:?}")
            }
            CorpusError::DuplicateId { id } => write!(f, "duplicate record id {id:?}"),
            CorpusError::EmptyCorpus => f.write_str("corpus has no records"),
        }
    }
}

impl core::error::Error for CorpusError {}

pub const TSV_HEADER: &str = "id\ttext\tlabel_a\tlabel_b\tlabel_c\tvulgar\tviolent";

impl Corpus {
    /// Build a corpus, enforcing id uniqueness.
    pub fn new(
        records: Vec<TweetRecord>,
        source_tag: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.id.clone()) {
                return Err(CorpusError::DuplicateId { id: r.id.clone() });
            }
        }
        Ok(Corpus {
            records,
            source_tag: source_tag.into(),
        })
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Replace every record's text via `f`, keeping ids, labels, and order.
    pub fn map_text(&self, mut f: impl FnMut(&str) -> String) -> Corpus {
        let records = self
            .records
            .iter()
            .map(|r| TweetRecord {
                text: f(&r.text),
                ..r.clone()
            })
            .collect();
        Corpus {
            records,
            source_tag: self.source_tag.clone(),
        }
    }
}

/// Parse TSV content with columns id, text, label_a, label_b, label_c,
/// vulgar, violent. Line numbers in errors are 1-based and count the header.
pub fn parse_tsv(input: &str, has_header: bool, source_tag: &str) -> Result<Corpus, CorpusError> {
    let mut records = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        if has_header && idx == 0 {
            continue;
        }
        if raw.is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 7 {
            return Err(CorpusError::MalformedRow {
                line: line_no,
                columns: cols.len(),
            });
        }
        let unknown = |column: &'static str, token: &str| CorpusError::UnknownLabel {
            line: line_no,
            column,
            token: token.to_owned(),
        };
        records.push(TweetRecord {
            id: cols[0].to_owned(),
            text: cols[1].to_owned(),
            label_a: LabelA::parse_token(cols[2]).ok_or_else(|| unknown("label_a", cols[2]))?,
            label_b: LabelB::parse_token(cols[3]).ok_or_else(|| unknown("label_b", cols[3]))?,
            label_c: LabelC::parse_token(cols[4]).ok_or_else(|| unknown("label_c", cols[4]))?,
            vulgar: Vulgar::parse_token(cols[5]).ok_or_else(|| unknown("vulgar", cols[5]))?,
            violent: Violent::parse_token(cols[6]).ok_or_else(|| unknown("violent", cols[6]))?,
        });
    }
    Corpus::new(records, source_tag)
}

/// Render a corpus back to the TSV schema. Tabs and newlines inside text are
/// replaced with single spaces so the row structure survives a round trip.
pub fn format_tsv(corpus: &Corpus, include_header: bool) -> String {
    let mut out = String::new();
    if include_header {
        out.push_str(TSV_HEADER);
        out.push('\n');
    }
    for r in corpus.records() {
        let text: String = r
            .text
            .chars()
            .map(|c| {
                if c == '\t' || c == '\n' || c == '\r' {
                    ' '
                } else {
                    c
                }
            })
            .collect();
        out.push_str(&r.id);
        out.push('\t');
        out.push_str(&text);
        for token in [
            r.label_a.token(),
            r.label_b.token(),
            r.label_c.token(),
            r.vulgar.token(),
            r.violent.token(),
        ] {
            out.push('\t');
            out.push_str(token);
        }
        out.push('\n');
    }
    out
}

/// Count and fraction of one label within a task.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelShare {
    pub label: &'static str,
    pub count: usize,
    pub fraction: f64,
}

/// Per-label counts and fractions for one task over one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport {
    pub task: Task,
    pub total: usize,
    pub entries: Vec<LabelShare>,
}

/// Exact label counts and fractions for `task`. Entries follow the task's
/// canonical label order; fractions sum to 1 up to rounding.
pub fn label_stats(corpus: &Corpus, task: Task) -> Result<DistributionReport, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut counts = alloc::vec![0usize; task.class_count()];
    for r in corpus.records() {
        counts[r.class_index(task)] += 1;
    }
    let total = corpus.len();
    let entries = task
        .labels()
        .iter()
        .zip(&counts)
        .map(|(&label, &count)| LabelShare {
            label,
            count,
            fraction: count as f64 / total as f64,
        })
        .collect();
    Ok(DistributionReport {
        task,
        total,
        entries,
    })
}

/// The two label-hierarchy rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HierarchyRule {
    /// NOT_OFF records must be NOT_HS.
    AImpliesB,
    /// label_b is NOT_HS exactly when label_c is NOT_HS.
    BIffC,
}

impl HierarchyRule {
    pub fn name(self) -> &'static str {
        match self {
            HierarchyRule::AImpliesB => "a_implies_b",
            HierarchyRule::BIffC => "b_iff_c",
        }
    }
}

impl fmt::Display for HierarchyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Check every record against both hierarchy rules. Violations are data, not
/// errors: noisy external corpora are still usable for balancing.
pub fn validate_hierarchy(corpus: &Corpus) -> Vec<(String, HierarchyRule)> {
    let mut violations = Vec::new();
    for r in corpus.records() {
        if r.label_a == LabelA::NotOff && r.label_b == LabelB::Hs {
            violations.push((r.id.clone(), HierarchyRule::AImpliesB));
        }
        let b_not = r.label_b == LabelB::NotHs;
        let c_not = r.label_c == LabelC::NotHs;
        if b_not != c_not {
            violations.push((r.id.clone(), HierarchyRule::BIffC));
        }
    }
    violations
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BalanceError {
    /// Balancing is defined for the binary sub-tasks only.
    UnsupportedTask(Task),
    /// `target_positive` is not a label of the task.
    UnknownLabel(String),
    /// The primary corpus has no record with the target label.
    NoPositives,
    /// The union pool ran out before counts could be equalized.
    InsufficientNegatives { positives: usize, negatives: usize },
}

impl fmt::Display for BalanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BalanceError::UnsupportedTask(t) => {
                write!(f, "balancing supports tasks A and B, not {t}")
            }
            BalanceError::UnknownLabel(l) => write!(f, "label {l:?} does not belong to the task"),
            BalanceError::NoPositives => f.write_str("primary corpus has no target-label records"),
            BalanceError::InsufficientNegatives {
                positives,
                negatives,
            } => write!(
                f,
                "pool exhausted at {negatives} negatives for {positives} positives"
            ),
        }
    }
}

impl core::error::Error for BalanceError {}

/// Build a class-balanced corpus by keeping every `target_positive` record of
/// `primary` and drawing the rest, seeded and uniformly without replacement,
/// from the union of the primary's other records and all `extras` records
/// (concatenated in argument order) until the two class counts are equal.
///
/// Drawn extras may themselves carry the positive label; each such draw
/// raises the positive count, so the output size is the smallest balanced
/// size reachable along the sampled sequence. Ids colliding across corpora
/// are qualified with their source tag.
pub fn undersample_balance(
    primary: &Corpus,
    extras: &[&Corpus],
    task: Task,
    target_positive: &str,
    seed: u64,
) -> Result<Corpus, BalanceError> {
    if task == Task::C {
        return Err(BalanceError::UnsupportedTask(task));
    }
    if !task.labels().contains(&target_positive) {
        return Err(BalanceError::UnknownLabel(target_positive.to_owned()));
    }
    let is_positive = |r: &TweetRecord| r.label_token(task) == target_positive;

    let mut kept: Vec<(&TweetRecord, &str)> = Vec::new();
    let mut pool: Vec<(&TweetRecord, &str)> = Vec::new();
    for r in primary.records() {
        if is_positive(r) {
            kept.push((r, primary.source_tag()));
        } else {
            pool.push((r, primary.source_tag()));
        }
    }
    if kept.is_empty() {
        return Err(BalanceError::NoPositives);
    }
    for extra in extras {
        for r in extra.records() {
            pool.push((r, extra.source_tag()));
        }
    }

    let mut positives = kept.len();
    let mut negatives = 0usize;
    let mut rng = Rng::seed_from(seed);
    let mut k = 0usize;
    while negatives < positives {
        if k == pool.len() {
            return Err(BalanceError::InsufficientNegatives {
                positives,
                negatives,
            });
        }
        let j = k + rng.below((pool.len() - k) as u64) as usize;
        pool.swap(k, j);
        let (record, tag) = pool[k];
        if is_positive(record) {
            positives += 1;
        } else {
            negatives += 1;
        }
        kept.push((record, tag));
        k += 1;
    }

    let mut seen: BTreeSet<String> = BTreeSet::new();
    let records = kept
        .into_iter()
        .map(|(r, tag)| {
            let mut id = r.id.clone();
            if !seen.insert(id.clone()) {
                id = format!("{tag}:{}", r.id);
                let mut bump = 2usize;
                while !seen.insert(id.clone()) {
                    id = format!("{tag}:{bump}:{}", r.id);
                    bump += 1;
                }
            }
            TweetRecord { id, ..r.clone() }
        })
        .collect();
    let tag = format!("balanced:{}", primary.source_tag());
    Ok(Corpus {
        records,
        source_tag: tag,
    })
}
