use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use sha2::{Digest, Sha256};

use super::TrainError;
use crate::vocab::Mode;

/// Whitespace-delimited segments of a corpus with occurrence counts.
///
/// Segment units are byte values in byte-level modes and Unicode scalar
/// values in character-level modes. Entries are kept sorted so iteration
/// order never depends on hashing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentTable {
    mode: Mode,
    entries: BTreeMap<(Option<String>, Vec<u32>), u64>,
}

/// One aggregated segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentEntry<'a> {
    pub tag: Option<&'a str>,
    pub units: &'a [u32],
    pub count: u64,
}

impl SegmentTable {
    pub fn new(mode: Mode) -> Self {
        SegmentTable {
            mode,
            entries: BTreeMap::new(),
        }
    }

    /// Read a corpus with one utterance per line.
    pub fn ingest<R: BufRead>(corpus: R, mode: Mode) -> Result<Self, TrainError> {
        Self::ingest_tagged(corpus, mode, None)
    }

    /// Like [`SegmentTable::ingest`], labelling every segment with `tag`.
    pub fn ingest_tagged<R: BufRead>(mut corpus: R, mode: Mode, tag: Option<&str>) -> Result<Self, TrainError> {
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        let mut buf = Vec::new();
        let mut line_no = 0usize;
        loop {
            buf.clear();
            if corpus.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line_no += 1;
            let line = std::str::from_utf8(&buf).map_err(|_| TrainError::Ingest { line: line_no })?;
            for segment in line.split_whitespace() {
                let units: Vec<u32> = if mode.is_byte_level() {
                    segment.bytes().map(u32::from).collect()
                } else {
                    segment.chars().map(u32::from).collect()
                };
                *counts.entry(units).or_insert(0) += 1;
            }
        }
        let tag = tag.map(str::to_owned);
        let entries = counts.into_iter().map(|(units, c)| ((tag.clone(), units), c)).collect();
        Ok(SegmentTable { mode, entries })
    }

    pub fn from_text(text: &str, mode: Mode) -> Self {
        Self::ingest(text.as_bytes(), mode).expect("a &str is valid UTF-8")
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Add `count` occurrences of a segment.
    pub fn add(&mut self, tag: Option<&str>, units: Vec<u32>, count: u64) {
        assert!(!units.is_empty() && count > 0, "segments are non-empty with positive counts");
        *self.entries.entry((tag.map(str::to_owned), units)).or_insert(0) += count;
    }

    /// Fold another table of the same unit kind into this one.
    pub fn extend(&mut self, other: &SegmentTable) -> Result<(), TrainError> {
        if self.mode.is_byte_level() != other.mode.is_byte_level() {
            return Err(TrainError::Config(format!(
                "cannot combine {} and {} segment tables",
                self.mode, other.mode
            )));
        }
        for ((tag, units), &c) in &other.entries {
            *self.entries.entry((tag.clone(), units.clone())).or_insert(0) += c;
        }
        Ok(())
    }

    /// Multiply every count by `factor`.
    pub fn scaled(&self, factor: u64) -> SegmentTable {
        SegmentTable {
            mode: self.mode,
            entries: self.entries.iter().map(|(k, &c)| (k.clone(), c * factor)).collect(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = SegmentEntry<'_>> {
        self.entries.iter().map(|((tag, units), &count)| SegmentEntry {
            tag: tag.as_deref(),
            units,
            count,
        })
    }

    /// Number of distinct (tag, segment) entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total segment occurrences.
    pub fn total_count(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Distinct units appearing in any segment.
    pub fn alphabet(&self) -> BTreeSet<u32> {
        self.entries.keys().flat_map(|(_, units)| units.iter().copied()).collect()
    }

    /// Characters seen, for character-level tables.
    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        let byte_level = self.mode.is_byte_level();
        self.alphabet()
            .into_iter()
            .filter(move |_| !byte_level)
            .map(|u| char::from_u32(u).expect("character tables hold scalar values"))
    }

    /// UTF-8 bytes of one unit.
    pub fn unit_bytes(&self, unit: u32) -> Vec<u8> {
        if self.mode.is_byte_level() {
            vec![unit as u8]
        } else {
            char::from_u32(unit).expect("scalar value").to_string().into_bytes()
        }
    }

    /// Content hash over the sorted entries.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.mode.as_str());
        for ((tag, units), c) in &self.entries {
            h.update(tag.as_deref().unwrap_or("").as_bytes());
            h.update([0]);
            for u in units {
                h.update(u.to_le_bytes());
            }
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}
