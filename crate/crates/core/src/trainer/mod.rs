//! BPE and byte-level BPE training with penalized bigram counts.

mod engine;
mod ingest;
mod penalty;

use std::collections::{BTreeMap, BTreeSet};
use std::marker::PhantomData;

use thiserror::Error;

use crate::bytecore::AlphabetClass;
use crate::scalar::Weight;
use crate::vocab::{PenaltyConfig, VocabBuilder, VocabError, Vocabulary, DEFAULT_SPECIALS};
use engine::{Engine, Word};

pub use ingest::{SegmentEntry, SegmentTable};
pub use penalty::{alphabet_penalty, length_penalty, PenaltyWeights};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("corpus line {line} is not valid UTF-8")]
    Ingest { line: usize },
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which segments the penalties apply to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum PenaltyScope {
    #[default]
    All,
    /// Only segments whose language tag is listed.
    Tags(BTreeSet<String>),
}

impl PenaltyScope {
    pub fn tags<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PenaltyScope::Tags(tags.into_iter().map(Into::into).collect())
    }

    fn covers(&self, tag: Option<&str>) -> bool {
        match self {
            PenaltyScope::All => true,
            PenaltyScope::Tags(set) => tag.is_some_and(|t| set.contains(t)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    /// Final vocabulary size including special tokens.
    pub target_size: usize,
    pub specials: Vec<String>,
    /// Worker threads for bigram counting; `None` uses the global pool.
    pub threads: Option<usize>,
    pub alphabet: AlphabetClass,
}

impl TrainOptions {
    pub fn new(target_size: usize) -> Self {
        TrainOptions {
            target_size,
            specials: DEFAULT_SPECIALS.iter().map(|s| s.to_string()).collect(),
            threads: None,
            alphabet: AlphabetClass::Ascii,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_specials<I, S>(mut self, specials: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.specials = specials.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_alphabet(mut self, alphabet: AlphabetClass) -> Self {
        self.alphabet = alphabet;
        self
    }
}

/// Count statistics for one adjacent pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramStat<W> {
    pub left: Vec<u8>,
    pub right: Vec<u8>,
    pub raw_count: u64,
    /// Byte length of `left ++ right`.
    pub merged_len: usize,
    pub adjusted_count: W,
}

/// Vocabulary trainer over weight type `W`.
#[derive(Debug, Clone)]
pub struct Trainer<W> {
    options: TrainOptions,
    _weight: PhantomData<W>,
}

impl<W: Weight> Trainer<W> {
    pub fn new(options: TrainOptions) -> Self {
        Trainer {
            options,
            _weight: PhantomData,
        }
    }

    pub fn options(&self) -> &TrainOptions {
        &self.options
    }

    /// Train on one table, penalizing the segments inside `scope`.
    pub fn train(
        &self,
        table: &SegmentTable,
        penalties: Option<PenaltyConfig>,
        scope: &PenaltyScope,
    ) -> Result<Vocabulary, TrainError> {
        let groups = vec![penalties, None];
        let assign = |e: &SegmentEntry<'_>| if scope.covers(e.tag) { 0 } else { 1 };
        let mut provenance = table_provenance([(table, penalties.as_ref())]);
        if let PenaltyScope::Tags(tags) = scope {
            provenance.insert("penalty_scope".to_owned(), tags.iter().cloned().collect::<Vec<_>>().join(","));
        }
        self.run(&[table], &groups, |_, e| assign(e), penalties, provenance)
    }

    /// Train one vocabulary on several tables at once. Each table's penalties
    /// apply to the bigram counts its own segments contribute; selection uses
    /// the summed adjusted counts.
    pub fn train_joint(&self, tables: &[(SegmentTable, Option<PenaltyConfig>)]) -> Result<Vocabulary, TrainError> {
        if tables.is_empty() {
            return Err(TrainError::Config("joint training needs at least one table".into()));
        }
        let refs: Vec<&SegmentTable> = tables.iter().map(|(t, _)| t).collect();
        let groups: Vec<Option<PenaltyConfig>> = tables.iter().map(|(_, p)| *p).collect();
        let mut distinct: Vec<PenaltyConfig> = Vec::new();
        for p in groups.iter().flatten() {
            if !distinct.contains(p) {
                distinct.push(*p);
            }
        }
        let recorded = match distinct.as_slice() {
            [only] => Some(*only),
            _ => None,
        };
        let provenance = table_provenance(tables.iter().map(|(t, p)| (t, p.as_ref())));
        self.run(&refs, &groups, |table_idx, _| table_idx, recorded, provenance)
    }

    /// All bigrams of `table` with raw and penalty-adjusted counts, in
    /// selection order.
    pub fn count_bigrams(
        &self,
        table: &SegmentTable,
        penalties: Option<PenaltyConfig>,
        scope: &PenaltyScope,
    ) -> Result<Vec<BigramStat<W>>, TrainError> {
        let engine = self.prepare(&[table], &[penalties, None], |_, e| if scope.covers(e.tag) { 0 } else { 1 })?;
        Ok(engine
            .all_candidates()
            .into_iter()
            .map(|c| BigramStat {
                merged_len: c.left.len() + c.right.len(),
                left: c.left.to_vec(),
                right: c.right.to_vec(),
                raw_count: c.raw,
                adjusted_count: c.adjusted,
            })
            .collect())
    }

    fn prepare(
        &self,
        tables: &[&SegmentTable],
        groups: &[Option<PenaltyConfig>],
        group_of: impl Fn(usize, &SegmentEntry<'_>) -> usize,
    ) -> Result<Engine<W>, TrainError> {
        let mode = tables[0].mode();
        if tables.iter().any(|t| t.mode() != mode) {
            return Err(TrainError::Config("all tables must share one vocabulary mode".into()));
        }
        for p in groups.iter().flatten() {
            if !mode.allows_merges() {
                return Err(TrainError::Config(format!("penalties do not apply to {mode} vocabularies")));
            }
            p.validate().map_err(TrainError::Config)?;
        }

        let chars: BTreeSet<char> = tables.iter().flat_map(|t| t.chars()).collect();
        let builder = VocabBuilder::base_for_mode(mode, self.options.specials.clone(), chars)?;
        let base_size = builder.len();
        if self.options.target_size < base_size {
            return Err(TrainError::Config(format!(
                "target size {} is smaller than the {} base symbols and special tokens",
                self.options.target_size, base_size
            )));
        }

        let mut words = Vec::new();
        for (ti, table) in tables.iter().enumerate() {
            for entry in table.entries() {
                let syms = entry
                    .units
                    .iter()
                    .map(|&u| builder.id_of(&table.unit_bytes(u)).expect("base covers every unit"))
                    .collect();
                words.push(Word {
                    syms,
                    count: entry.count,
                    group: group_of(ti, &entry),
                });
            }
        }
        let weights = groups.iter().map(|g| g.as_ref().map(PenaltyWeights::new)).collect();
        let alphabet = self.options.alphabet;
        Ok(self.in_pool(move || Engine::new(builder, words, weights, alphabet)))
    }

    fn run(
        &self,
        tables: &[&SegmentTable],
        groups: &[Option<PenaltyConfig>],
        group_of: impl Fn(usize, &SegmentEntry<'_>) -> usize,
        recorded_penalty: Option<PenaltyConfig>,
        provenance: BTreeMap<String, String>,
    ) -> Result<Vocabulary, TrainError> {
        let mut engine = self.prepare(tables, groups, group_of)?;
        if tables[0].mode().allows_merges() {
            engine.run(self.options.target_size)?;
        }
        Ok(engine.builder.finish(recorded_penalty, provenance)?)
    }

    fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        match self.options.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map(|pool| pool.install(f))
                .expect("thread pool"),
            None => f(),
        }
    }
}

fn table_provenance<'a>(
    tables: impl IntoIterator<Item = (&'a SegmentTable, Option<&'a PenaltyConfig>)>,
) -> BTreeMap<String, String> {
    let mut provenance = BTreeMap::new();
    for (i, (t, p)) in tables.into_iter().enumerate() {
        provenance.insert(format!("table{i}_sha256"), t.digest());
        let desc = match p {
            Some(p) => format!("alpha={} n={} beta={}", p.alpha, p.cutoff_n, p.beta),
            None => "none".to_owned(),
        };
        provenance.insert(format!("table{i}_penalty"), desc);
    }
    provenance
}

/// One line per merge: rank, left and right symbols as hex, raw and adjusted
/// counts.
pub fn merge_log(vocab: &Vocabulary) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for m in vocab.merges() {
        let l = vocab.symbol(m.left).map(|s| hex::encode(s.bytes())).unwrap_or_default();
        let r = vocab.symbol(m.right).map(|s| hex::encode(s.bytes())).unwrap_or_default();
        let _ = writeln!(out, "{} {} {} {} {:.16e}", m.rank, l, r, m.raw_count, m.adjusted_count);
    }
    out
}
