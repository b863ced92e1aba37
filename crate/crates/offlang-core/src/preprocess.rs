//! Text normalization for Arabic social-media content.
//!
//! Seven stages, applied in a configurable order: Alef unification,
//! Arabic-to-ASCII punctuation and digit mapping, hashtag segmentation,
//! diacritic stripping (shaddah kept), symbol and placeholder-token removal,
//! and collapsing of character/emoji runs. Emojis are deliberately preserved;
//! they carry signal in this data. The full pipeline is idempotent: hashtag
//! segmentation runs before symbol stripping so '#' and '_' cannot reappear.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::Corpus;

/// One normalization stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    AlefNorm,
    PunctNorm,
    DigitNorm,
    HashtagSegment,
    DiacriticStrip,
    SymbolStrip,
    RunCollapse,
}

impl Stage {
    /// All stages in the default application order.
    pub const DEFAULT_ORDER: [Stage; 7] = [
        Stage::AlefNorm,
        Stage::PunctNorm,
        Stage::DigitNorm,
        Stage::HashtagSegment,
        Stage::DiacriticStrip,
        Stage::SymbolStrip,
        Stage::RunCollapse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::AlefNorm => "alef_norm",
            Stage::PunctNorm => "punct_norm",
            Stage::DigitNorm => "digit_norm",
            Stage::HashtagSegment => "hashtag_segment",
            Stage::DiacriticStrip => "diacritic_strip",
            Stage::SymbolStrip => "symbol_strip",
            Stage::RunCollapse => "run_collapse",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Stage::DEFAULT_ORDER
            .iter()
            .copied()
            .find(|st| st.name() == s)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    EmptyStages,
    ZeroMaxRun,
    UnknownStage(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::EmptyStages => f.write_str("stage list is empty"),
            ConfigError::ZeroMaxRun => f.write_str("max_run must be at least 1"),
            ConfigError::UnknownStage(s) => write!(f, "unknown stage {s:?}"),
        }
    }
}

impl core::error::Error for ConfigError {}

/// Ordered stage list plus the run-collapse cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationConfig {
    stages: Vec<Stage>,
    max_run: usize,
}

impl NormalizationConfig {
    pub fn new(stages: Vec<Stage>, max_run: usize) -> Result<Self, ConfigError> {
        if stages.is_empty() {
            return Err(ConfigError::EmptyStages);
        }
        if max_run == 0 {
            return Err(ConfigError::ZeroMaxRun);
        }
        Ok(NormalizationConfig { stages, max_run })
    }

    /// Parse a comma-separated stage list, e.g. `"alef_norm,run_collapse"`.
    pub fn from_stage_names(names: &str, max_run: usize) -> Result<Self, ConfigError> {
        let stages = names
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Stage::parse(s).ok_or_else(|| ConfigError::UnknownStage(s.into())))
            .collect::<Result<Vec<_>, _>>()?;
        NormalizationConfig::new(stages, max_run)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn max_run(&self) -> usize {
        self.max_run
    }
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            stages: Stage::DEFAULT_ORDER.to_vec(),
            max_run: 2,
        }
    }
}

/// Characters removed by `symbol_strip`.
pub const STRIP_SET: [char; 10] = ['|', '/', '#', '[', ']', '{', '}', '-', '_', '*'];
// '@' is part of the strip set too; kept separate above only because the
// array is reused in tests. See `is_stripped_symbol`.

#[inline]
fn is_stripped_symbol(c: char) -> bool {
    c == '@' || STRIP_SET.contains(&c)
}

fn alef_norm(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{0623}' | '\u{0625}' | '\u{0622}' => '\u{0627}', // أ إ آ -> ا
            other => other,
        })
        .collect()
}

fn punct_norm(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{061F}' => '?', // ؟
            '\u{060C}' => ',', // ،
            '\u{061B}' => ';', // ؛
            other => other,
        })
        .collect()
}

fn digit_norm(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            // Arabic-Indic and Eastern Arabic-Indic digits
            '\u{0660}'..='\u{0669}' => char::from(b'0' + (c as u32 - 0x0660) as u8),
            '\u{06F0}'..='\u{06F9}' => char::from(b'0' + (c as u32 - 0x06F0) as u8),
            other => other,
        })
        .collect()
}

/// Rewrite whitespace-delimited tokens starting with '#': drop the '#'
/// markers and turn '_' separators into spaces. Other whitespace is kept
/// verbatim; no dictionary segmentation is attempted.
fn hashtag_segment(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if token.starts_with('#') {
            for c in token.chars() {
                match c {
                    '#' => {}
                    '_' => out.push(' '),
                    other => out.push(other),
                }
            }
        } else {
            out.push_str(token);
        }
        token.clear();
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut token, &mut out);
            out.push(c);
        } else {
            token.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

/// Remove Arabic diacritics U+064B..U+0652 except shaddah (U+0651).
fn diacritic_strip(text: &str) -> String {
    text.chars()
        .filter(|&c| !matches!(c, '\u{064B}'..='\u{0652}') || c == '\u{0651}')
        .collect()
}

/// Remove the symbol set, then drop standalone "USER" / "LF" placeholder
/// tokens. Token filtering rejoins on single spaces, so this stage also
/// collapses whitespace runs.
fn symbol_strip(text: &str) -> String {
    let cleaned: String = text.chars().filter(|&c| !is_stripped_symbol(c)).collect();
    let mut out = String::with_capacity(cleaned.len());
    for token in cleaned.split_whitespace() {
        if token == "USER" || token == "LF" {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Cap consecutive repeats of the same extended grapheme cluster at
/// `max_run`, so multi-code-point emojis collapse as single units.
fn run_collapse(text: &str, max_run: usize) -> String {
    let mut out = String::with_capacity(text.len());
    let mut previous: Option<&str> = None;
    let mut run = 0usize;
    for g in text.graphemes(true) {
        if previous == Some(g) {
            run += 1;
        } else {
            previous = Some(g);
            run = 1;
        }
        if run <= max_run {
            out.push_str(g);
        }
    }
    out
}

/// Apply the configured stages in order.
pub fn normalize(text: &str, config: &NormalizationConfig) -> String {
    let mut current = String::from(text);
    for stage in config.stages() {
        current = match stage {
            Stage::AlefNorm => alef_norm(&current),
            Stage::PunctNorm => punct_norm(&current),
            Stage::DigitNorm => digit_norm(&current),
            Stage::HashtagSegment => hashtag_segment(&current),
            Stage::DiacriticStrip => diacritic_strip(&current),
            Stage::SymbolStrip => symbol_strip(&current),
            Stage::RunCollapse => run_collapse(&current, config.max_run()),
        };
    }
    current
}

/// Normalize every record's text; ids, labels, and order are untouched.
pub fn normalize_corpus(corpus: &Corpus, config: &NormalizationConfig) -> Corpus {
    corpus.map_text(|text| normalize(text, config))
}
