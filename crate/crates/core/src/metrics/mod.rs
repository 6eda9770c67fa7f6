//! Analysis measures: edit alignment and error rates, symbol sharing between
//! vocabularies, hypothesis length and script-based language confusion.

mod align;
mod language;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{seq_length, TokenSeq};
use crate::vocab::Vocabulary;

pub use align::{align, AlignmentStats};
pub use language::{classify_language, confusion_report, ConfusionReport, LangLabel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("incompatible vocabularies: {0}")]
    IncompatibleVocab(String),
}

/// Token unit for error rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    /// Whitespace-separated words.
    Word,
    /// Unicode characters, whitespace removed. Latin words are split into
    /// letters as well.
    Char,
}

impl std::str::FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" => Ok(Unit::Word),
            "char" => Ok(Unit::Char),
            other => Err(format!("unknown unit `{other}` (expected word or char)")),
        }
    }
}

impl Unit {
    pub fn tokenize(self, text: &str) -> Vec<&str> {
        match self {
            Unit::Word => text.split_whitespace().collect(),
            Unit::Char => text
                .char_indices()
                .filter(|(_, c)| !c.is_whitespace())
                .map(|(i, c)| &text[i..i + c.len_utf8()])
                .collect(),
        }
    }
}

/// Summed alignment counts over paired utterances.
pub fn corpus_alignment<S: AsRef<str> + Sync>(
    refs: &[S],
    hyps: &[S],
    unit: Unit,
) -> Result<AlignmentStats, MetricsError> {
    if refs.len() != hyps.len() {
        return Err(MetricsError::Input(format!(
            "{} references but {} hypotheses",
            refs.len(),
            hyps.len()
        )));
    }
    Ok(refs
        .par_iter()
        .zip(hyps.par_iter())
        .map(|(r, h)| align(&unit.tokenize(r.as_ref()), &unit.tokenize(h.as_ref())))
        .reduce(AlignmentStats::default, |a, b| a + b))
}

/// Corpus-level error rate: total edits over total reference length.
pub fn error_rate<S: AsRef<str> + Sync>(refs: &[S], hyps: &[S], unit: Unit) -> Result<f64, MetricsError> {
    Ok(corpus_alignment(refs, hyps, unit)?.error_rate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharingReport {
    /// Size of the union of the two symbol sets.
    pub total_symbols: usize,
    /// Symbols present in both sets.
    pub shared_symbols: usize,
    pub rate: f64,
}

/// Share of symbols two vocabularies have in common, over their union.
/// Special tokens are excluded.
pub fn sharing_rate(a: &Vocabulary, b: &Vocabulary) -> Result<SharingReport, MetricsError> {
    if a.specials() != b.specials() {
        return Err(MetricsError::IncompatibleVocab("special tokens differ".into()));
    }
    let sa: BTreeSet<&[u8]> = a.symbols().iter().map(|s| s.bytes()).collect();
    let sb: BTreeSet<&[u8]> = b.symbols().iter().map(|s| s.bytes()).collect();
    Ok(sharing_of_sets(&sa, &sb))
}

/// [`sharing_rate`] on bare symbol sets.
pub fn sharing_of_sets<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> SharingReport {
    let shared = a.intersection(b).count();
    let total = a.len() + b.len() - shared;
    SharingReport {
        total_symbols: total,
        shared_symbols: shared,
        rate: if total == 0 { 0.0 } else { shared as f64 / total as f64 },
    }
}

/// Mean number of non-special symbols per hypothesis.
pub fn avg_hyp_length(hyps: &[TokenSeq]) -> Result<f64, MetricsError> {
    let Some(first) = hyps.first() else {
        return Err(MetricsError::Input("no hypotheses".into()));
    };
    if hyps.iter().any(|h| h.vocab_fingerprint() != first.vocab_fingerprint()) {
        return Err(MetricsError::Input("hypotheses come from different vocabularies".into()));
    }
    let total: usize = hyps.iter().map(seq_length).sum();
    Ok(total as f64 / hyps.len() as f64)
}
