//! Vocabulary data model: special tokens, base symbols and ordered merges.
//!
//! Ids are assigned in a fixed order: special tokens first, then base
//! symbols, then one id per merge result in rank order. Symbols carry raw
//! bytes because byte-level merges can produce fragments that are not valid
//! UTF-8 on their own.

mod composition;
mod format;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::bytecore::is_alphabetic_byte;

pub use composition::{CompositionFractions, CompositionStats, SymbolClass};
pub use format::{FORMAT_MAGIC, FORMAT_VERSION};

/// The six special tokens every vocabulary starts with unless configured
/// otherwise. Only BOS and EOS have fixed meaning.
pub const DEFAULT_SPECIALS: [&str; 6] = ["BOS", "EOS", "PAD", "UNK", "SEP", "MASK"];

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("unsupported vocabulary format version: {found}")]
    Version { found: String },
    #[error("corrupt vocabulary ({invariant}){}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Corrupt {
        invariant: String,
        line: Option<usize>,
    },
    #[error("incompatible vocabularies: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl VocabError {
    pub(crate) fn corrupt(invariant: impl Into<String>) -> Self {
        VocabError::Corrupt {
            invariant: invariant.into(),
            line: None,
        }
    }
}

/// How base symbols are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Whole characters, no merges.
    Character,
    /// Whole characters plus merges.
    Bpe,
    /// The 256 byte values, no merges.
    Byte,
    /// The 256 byte values plus merges.
    Bbpe,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Character => "character",
            Mode::Bpe => "bpe",
            Mode::Byte => "byte",
            Mode::Bbpe => "bbpe",
        }
    }

    pub fn is_byte_level(self) -> bool {
        matches!(self, Mode::Byte | Mode::Bbpe)
    }

    pub fn allows_merges(self) -> bool {
        matches!(self, Mode::Bpe | Mode::Bbpe)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "character" | "char" => Ok(Mode::Character),
            "bpe" => Ok(Mode::Bpe),
            "byte" | "utf8" => Ok(Mode::Byte),
            "bbpe" => Ok(Mode::Bbpe),
            other => Err(format!("unknown vocabulary mode `{other}`")),
        }
    }
}

/// Bigram count penalties: a length penalty `alpha` on merges longer than
/// `cutoff_n` bytes and an alphabet penalty `beta` on all-letter merges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyConfig {
    pub alpha: f64,
    pub cutoff_n: usize,
    pub beta: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            alpha: 0.99,
            cutoff_n: 3,
            beta: 0.999,
        }
    }
}

impl PenaltyConfig {
    /// A config under which every adjusted count equals its raw count.
    pub fn neutral() -> Self {
        PenaltyConfig {
            alpha: 0.0,
            cutoff_n: 3,
            beta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(format!("beta must be in [0, 1], got {}", self.beta));
        }
        if self.cutoff_n == 0 {
            return Err("cutoff n must be at least 1".into());
        }
        Ok(())
    }
}

/// One vocabulary unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    id: u32,
    bytes: Arc<[u8]>,
}

impl Symbol {
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn byte_len(&self) -> usize {
        self.bytes.len()
    }

    /// Every byte is an ASCII letter.
    pub fn is_alphabetic(&self) -> bool {
        self.bytes.iter().all(|&b| is_alphabetic_byte(b))
    }

    /// Number of characters, or `None` for a fragment that is not valid UTF-8.
    pub fn char_count(&self) -> Option<usize> {
        std::str::from_utf8(&self.bytes).ok().map(|s| s.chars().count())
    }

    pub fn as_str(&self) -> Option<&str> {
        std::str::from_utf8(&self.bytes).ok()
    }

}

/// A learned merge `left ++ right -> result`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeRule {
    pub rank: usize,
    pub left: u32,
    pub right: u32,
    pub result: u32,
    /// Occurrences of the pair when it was selected.
    pub raw_count: u64,
    /// Penalty-adjusted count when it was selected.
    pub adjusted_count: f64,
}

/// Incremental constructor that enforces every vocabulary invariant as
/// symbols and merges are added.
#[derive(Debug, Clone)]
pub struct VocabBuilder {
    mode: Mode,
    specials: Vec<String>,
    symbols: Vec<Symbol>,
    base_len: usize,
    merges: Vec<MergeRule>,
    index: HashMap<Arc<[u8]>, u32>,
    pairs: HashMap<(u32, u32), usize>,
}

impl VocabBuilder {
    pub fn new<S, B>(mode: Mode, specials: S, base: B) -> Result<Self, VocabError>
    where
        S: IntoIterator,
        S::Item: Into<String>,
        B: IntoIterator,
        B::Item: AsRef<[u8]>,
    {
        let specials: Vec<String> = specials.into_iter().map(Into::into).collect();
        for (i, name) in specials.iter().enumerate() {
            if name.is_empty() || name.contains(':') || name.chars().any(char::is_whitespace) {
                return Err(VocabError::corrupt(format!("special token name `{name}` is not a plain word")));
            }
            if specials[..i].contains(name) {
                return Err(VocabError::corrupt(format!("duplicate special token `{name}`")));
            }
        }
        let mut builder = VocabBuilder {
            mode,
            specials,
            symbols: Vec::new(),
            base_len: 0,
            merges: Vec::new(),
            index: HashMap::new(),
            pairs: HashMap::new(),
        };
        for bytes in base {
            builder.push_symbol(bytes.as_ref())?;
        }
        builder.base_len = builder.symbols.len();

        if mode.is_byte_level() {
            let exact = builder.base_len == 256
                && builder.symbols.iter().enumerate().all(|(i, s)| s.bytes() == [i as u8]);
            if !exact {
                return Err(VocabError::corrupt("byte-level base symbols must be the 256 single bytes in order"));
            }
        } else {
            for s in &builder.symbols {
                if s.char_count() != Some(1) {
                    return Err(VocabError::corrupt(format!(
                        "character-level base symbol {} is not exactly one character",
                        hex::encode(s.bytes())
                    )));
                }
            }
        }
        Ok(builder)
    }

    /// Base vocabulary of the given mode: the 256 bytes, or the supplied
    /// characters sorted by their UTF-8 bytes.
    pub fn base_for_mode<S, I>(mode: Mode, specials: S, chars: I) -> Result<Self, VocabError>
    where
        S: IntoIterator,
        S::Item: Into<String>,
        I: IntoIterator<Item = char>,
    {
        if mode.is_byte_level() {
            Self::new(mode, specials, (0..=255u8).map(|b| [b]))
        } else {
            let mut chars: Vec<char> = chars.into_iter().collect();
            // char order equals UTF-8 byte order
            chars.sort_unstable();
            chars.dedup();
            Self::new(mode, specials, chars.iter().map(|c| c.to_string().into_bytes()))
        }
    }

    fn push_symbol(&mut self, bytes: &[u8]) -> Result<u32, VocabError> {
        if bytes.is_empty() {
            return Err(VocabError::corrupt("empty symbol"));
        }
        if self.index.contains_key(bytes) {
            return Err(VocabError::corrupt(format!("duplicate symbol {}", hex::encode(bytes))));
        }
        let id = (self.specials.len() + self.symbols.len()) as u32;
        let bytes: Arc<[u8]> = Arc::from(bytes);
        self.index.insert(bytes.clone(), id);
        self.symbols.push(Symbol { id, bytes });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.specials.len() + self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn merge_count(&self) -> usize {
        self.merges.len()
    }

    pub fn contains_bytes(&self, bytes: &[u8]) -> bool {
        self.index.contains_key(bytes)
    }

    pub fn id_of(&self, bytes: &[u8]) -> Option<u32> {
        self.index.get(bytes).copied()
    }

    pub fn contains_pair(&self, left: u32, right: u32) -> bool {
        self.pairs.contains_key(&(left, right))
    }

    pub(crate) fn symbol_arc(&self, id: u32) -> Option<Arc<[u8]>> {
        let offset = (id as usize).checked_sub(self.specials.len())?;
        self.symbols.get(offset).map(|s| s.bytes.clone())
    }

    pub fn symbol_bytes(&self, id: u32) -> Option<&[u8]> {
        let offset = (id as usize).checked_sub(self.specials.len())?;
        self.symbols.get(offset).map(Symbol::bytes)
    }

    /// Append the next merge rule. Returns the id of the new result symbol.
    pub fn push_merge(&mut self, left: u32, right: u32, raw_count: u64, adjusted_count: f64) -> Result<u32, VocabError> {
        if !self.mode.allows_merges() {
            return Err(VocabError::corrupt(format!("{} vocabularies cannot hold merges", self.mode)));
        }
        let rank = self.merges.len();
        let (Some(l), Some(r)) = (self.symbol_bytes(left), self.symbol_bytes(right)) else {
            return Err(VocabError::corrupt(format!("merge {rank} references an unknown or special symbol")));
        };
        if !adjusted_count.is_finite() || adjusted_count < 0.0 || adjusted_count > raw_count as f64 {
            return Err(VocabError::corrupt(format!(
                "merge {rank} adjusted count {adjusted_count} must lie in [0, raw count {raw_count}]"
            )));
        }
        let mut joined = Vec::with_capacity(l.len() + r.len());
        joined.extend_from_slice(l);
        joined.extend_from_slice(r);
        let result = self.push_symbol(&joined).map_err(|_| {
            VocabError::corrupt(format!("merge {rank} result {} duplicates an existing symbol", hex::encode(&joined)))
        })?;
        self.pairs.insert((left, right), rank);
        self.merges.push(MergeRule {
            rank,
            left,
            right,
            result,
            raw_count,
            adjusted_count,
        });
        Ok(result)
    }

    pub fn finish(
        self,
        penalty: Option<PenaltyConfig>,
        provenance: BTreeMap<String, String>,
    ) -> Result<Vocabulary, VocabError> {
        if let Some(p) = &penalty {
            if !self.mode.allows_merges() {
                return Err(VocabError::corrupt(format!("{} vocabularies cannot carry a penalty config", self.mode)));
            }
            p.validate().map_err(VocabError::corrupt)?;
        }
        for key in provenance.keys() {
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(VocabError::corrupt(format!("provenance key `{key}` is not a plain word")));
            }
        }
        Ok(Vocabulary {
            mode: self.mode,
            specials: self.specials,
            symbols: self.symbols,
            base_len: self.base_len,
            merges: self.merges,
            penalty,
            provenance,
            index: self.index,
            pairs: self.pairs,
            fingerprint: OnceLock::new(),
        })
    }
}

/// A trained (or loaded) vocabulary. Immutable.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    mode: Mode,
    specials: Vec<String>,
    symbols: Vec<Symbol>,
    base_len: usize,
    merges: Vec<MergeRule>,
    penalty: Option<PenaltyConfig>,
    provenance: BTreeMap<String, String>,
    index: HashMap<Arc<[u8]>, u32>,
    pairs: HashMap<(u32, u32), usize>,
    fingerprint: OnceLock<String>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode
            && self.specials == other.specials
            && self.symbols == other.symbols
            && self.base_len == other.base_len
            && self.merges == other.merges
            && self.penalty == other.penalty
            && self.provenance == other.provenance
    }
}

impl Vocabulary {
    /// The plain byte vocabulary: specials plus the 256 byte values.
    pub fn byte_level<S>(specials: S) -> Self
    where
        S: IntoIterator,
        S::Item: Into<String>,
    {
        VocabBuilder::base_for_mode(Mode::Byte, specials, [])
            .and_then(|b| b.finish(None, BTreeMap::new()))
            .expect("byte vocabulary is always well formed")
    }

    /// A character vocabulary over the given characters.
    pub fn character<S, I>(specials: S, chars: I) -> Result<Self, VocabError>
    where
        S: IntoIterator,
        S::Item: Into<String>,
        I: IntoIterator<Item = char>,
    {
        VocabBuilder::base_for_mode(Mode::Character, specials, chars)?.finish(None, BTreeMap::new())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn specials(&self) -> &[String] {
        &self.specials
    }

    pub fn special_count(&self) -> usize {
        self.specials.len()
    }

    pub fn special_id(&self, name: &str) -> Option<u32> {
        self.specials.iter().position(|s| s == name).map(|i| i as u32)
    }

    pub fn is_special(&self, id: u32) -> bool {
        (id as usize) < self.specials.len()
    }

    /// Total size: specials plus all symbols.
    pub fn len(&self) -> usize {
        self.specials.len() + self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All non-special symbols in id order.
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn base_symbols(&self) -> &[Symbol] {
        &self.symbols[..self.base_len]
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn penalty(&self) -> Option<&PenaltyConfig> {
        self.penalty.as_ref()
    }

    pub fn provenance(&self) -> &BTreeMap<String, String> {
        &self.provenance
    }

    pub fn symbol(&self, id: u32) -> Option<&Symbol> {
        let offset = (id as usize).checked_sub(self.specials.len())?;
        self.symbols.get(offset)
    }

    pub fn id_of(&self, bytes: &[u8]) -> Option<u32> {
        self.index.get(bytes).copied()
    }

    /// The merge joining `left` and `right`, if one was learned.
    pub fn merge_for(&self, left: u32, right: u32) -> Option<&MergeRule> {
        self.pairs.get(&(left, right)).map(|&rank| &self.merges[rank])
    }

    /// Short content hash of the serialized vocabulary.
    pub fn fingerprint(&self) -> &str {
        self.fingerprint.get_or_init(|| {
            use sha2::{Digest, Sha256};
            let digest = Sha256::digest(self.to_file_string().as_bytes());
            hex::encode(&digest[..8])
        })
    }

    /// Set union of two vocabularies' symbols.
    ///
    /// Base symbols of `a` come first, then base symbols of `b` not already
    /// present. Merges of `a` keep their order; merges of `b` follow,
    /// re-ranked, skipping any whose result byte string already exists.
    pub fn union(a: &Vocabulary, b: &Vocabulary) -> Result<Vocabulary, VocabError> {
        if a.specials != b.specials {
            return Err(VocabError::Incompatible(format!(
                "special tokens differ: [{}] vs [{}]",
                a.specials.join(" "),
                b.specials.join(" ")
            )));
        }
        let mode = match (a.mode, b.mode) {
            (x, y) if x == y => x,
            (Mode::Character, Mode::Bpe) | (Mode::Bpe, Mode::Character) => Mode::Bpe,
            (Mode::Byte, Mode::Bbpe) | (Mode::Bbpe, Mode::Byte) => Mode::Bbpe,
            (x, y) => {
                return Err(VocabError::Incompatible(format!(
                    "cannot combine a {x} vocabulary with a {y} vocabulary"
                )))
            }
        };

        let mut base: Vec<&[u8]> = a.base_symbols().iter().map(Symbol::bytes).collect();
        let a_bytes: std::collections::HashSet<&[u8]> = a.symbols.iter().map(Symbol::bytes).collect();
        for s in b.base_symbols() {
            if !a_bytes.contains(s.bytes()) && !base.contains(&s.bytes()) {
                base.push(s.bytes());
            }
        }
        let mut builder = if mode.is_byte_level() {
            VocabBuilder::base_for_mode(mode, a.specials.clone(), [])?
        } else {
            VocabBuilder::new(mode, a.specials.clone(), base)?
        };

        for vocab in [a, b] {
            for m in &vocab.merges {
                let left = &vocab.symbol(m.left).expect("merge parents exist").bytes;
                let right = &vocab.symbol(m.right).expect("merge parents exist").bytes;
                let joined: Vec<u8> = left.iter().chain(right.iter()).copied().collect();
                if builder.contains_bytes(&joined) {
                    continue;
                }
                // Parents are present: both vocabularies define them before use.
                let l = builder.id_of(left).expect("left parent present");
                let r = builder.id_of(right).expect("right parent present");
                builder.push_merge(l, r, m.raw_count, m.adjusted_count)?;
            }
        }

        let penalty = if a.penalty == b.penalty { a.penalty } else { None };
        let mut provenance = a.provenance.clone();
        for (k, v) in &b.provenance {
            provenance.entry(k.clone()).or_insert_with(|| v.clone());
        }
        builder.finish(penalty, provenance)
    }
}
