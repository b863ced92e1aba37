//! Shared test support: the bundled toy fixture generator and scratch-dir
//! helpers. The committed fixture TSVs under `tests/fixtures/` are exactly
//! what `toy_fixture_tsv` produces; `fixtures_match_generator` in the
//! acceptance suite guards against drift.

#![allow(dead_code)] // each test binary uses a different subset

use std::path::{Path, PathBuf};

use offlang_core::rng::Rng;

pub const FIXTURE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

const BENIGN: [&str; 12] = [
    "coffee", "morning", "friend", "book", "river", "music", "garden", "lunch", "walk", "study",
    "قهوة", "صباح",
];

/// Deterministic, hierarchy-consistent, linearly separable corpus: offensive
/// texts carry "xbad", hateful ones also carry "xhate" plus a class marker.
pub fn toy_fixture_tsv(n: usize, seed: u64, tag: &str) -> String {
    let mut rng = Rng::seed_from(seed);
    let mut out = String::from("id\ttext\tlabel_a\tlabel_b\tlabel_c\tvulgar\tviolent\n");
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
        let vulgar = if off && rng.next_f64() < 0.2 {
            "VLG"
        } else {
            "NOT_VLG"
        };
        out.push_str(&format!(
            "{tag}{i}\t{}\t{a}\t{b}\t{c}\t{vulgar}\tNOT_VIO\n",
            words.join(" ")
        ));
    }
    out
}

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(FIXTURE_DIR).join(name)
}

/// Fresh scratch directory under the system temp dir.
pub fn scratch_dir(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("offlang-{label}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

/// Path of the compiled `offlang` binary.
pub fn offlang_bin() -> &'static str {
    env!("CARGO_BIN_EXE_offlang")
}
