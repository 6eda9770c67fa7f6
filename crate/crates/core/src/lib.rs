//! Byte-level BPE toolkit.
//!
//! * [`bytecore`]: UTF-8 primitives and byte-deleting repair of invalid output.
//! * [`vocab`]: vocabularies, their file format and composition queries.
//! * [`trainer`]: BPE/BBPE training with length and alphabet penalties.
//! * [`codec`]: encoding text to ids and decoding ids back to text.
//! * [`metrics`]: alignment, error rates, symbol sharing and language checks.
//!
//! Training is generic over the number type carrying penalty-adjusted counts
//! (see [`Weight`]). [`ExactTrainer`] uses 128-bit rationals and never rounds;
//! [`FloatTrainer`] uses `f64` with a fixed tie tolerance.

pub mod bytecore;
pub mod codec;
pub mod metrics;
pub mod scalar;
pub mod script;
pub mod trainer;
pub mod vocab;

pub use bytecore::{is_alphabetic_byte, is_valid_utf8, repair_utf8, text_to_bytes, AlphabetClass, RepairResult};
pub use codec::{decode, decode_ids, encode, seq_length, CodecError, Decoded, Encoder, TokenSeq};
pub use metrics::{
    align, avg_hyp_length, classify_language, confusion_report, corpus_alignment, error_rate, sharing_of_sets,
    sharing_rate, AlignmentStats,
    ConfusionReport, LangLabel, MetricsError, SharingReport, Unit,
};
pub use scalar::Weight;
pub use trainer::{
    alphabet_penalty, length_penalty, merge_log, BigramStat, PenaltyScope, SegmentTable, TrainError, TrainOptions,
    Trainer,
};
pub use vocab::{
    CompositionStats, MergeRule, Mode, PenaltyConfig, Symbol, SymbolClass, VocabBuilder, VocabError, Vocabulary,
    DEFAULT_SPECIALS,
};

/// Exact rational weight.
pub type Rational = num_rational::Ratio<i128>;

/// Trainer on exact rationals: adjusted counts are compared without rounding.
pub type ExactTrainer = Trainer<Rational>;

/// Trainer on `f64`; adjusted counts within `1e-9` are treated as tied.
pub type FloatTrainer = Trainer<f64>;

/// Trainer on `f32`, for memory-constrained runs.
pub type F32Trainer = Trainer<f32>;
