//! Incremental merge loop.
//!
//! Pair counts are kept per penalty group so each group's penalties apply
//! only to the occurrences it contributed. Candidates sit in a max-heap with
//! lazy invalidation: counts of existing pairs only ever fall, so a popped
//! entry whose key still matches the live count is the true maximum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::penalty::{apply_merge, for_each_pair, PenaltyWeights};
use crate::bytecore::AlphabetClass;
use crate::scalar::Weight;
use crate::vocab::{VocabBuilder, VocabError};

pub(crate) type Pair = (u32, u32);

pub(crate) struct Word {
    pub syms: Vec<u32>,
    pub count: u64,
    pub group: usize,
}

/// A bigram's standing at one point in training.
#[derive(Debug, Clone)]
pub(crate) struct Candidate<W> {
    pub pair: Pair,
    pub raw: u64,
    pub adjusted: W,
    pub left: Arc<[u8]>,
    pub right: Arc<[u8]>,
}

impl<W: Weight> Candidate<W> {
    fn same_standing(&self, other: &Self) -> bool {
        self.raw == other.raw && self.adjusted.weight_cmp(&other.adjusted) == Ordering::Equal
    }

    pub fn merged(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.left.len() + self.right.len());
        v.extend_from_slice(&self.left);
        v.extend_from_slice(&self.right);
        v
    }
}

/// Selection order: higher adjusted count, then higher raw count, then the
/// lexicographically smaller `(left, right)` byte pair.
impl<W: Weight> Ord for Candidate<W> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.adjusted
            .weight_cmp(&other.adjusted)
            .then(self.raw.cmp(&other.raw))
            .then_with(|| (&other.left, &other.right).cmp(&(&self.left, &self.right)))
    }
}

impl<W: Weight> PartialOrd for Candidate<W> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<W: Weight> PartialEq for Candidate<W> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<W: Weight> Eq for Candidate<W> {}

pub(crate) struct Engine<W> {
    words: Vec<Word>,
    counts: FxHashMap<Pair, Box<[u64]>>,
    occurs_in: FxHashMap<Pair, Vec<u32>>,
    groups: Vec<Option<PenaltyWeights<W>>>,
    alphabet: AlphabetClass,
    pub builder: VocabBuilder,
}

impl<W: Weight> Engine<W> {
    pub fn new(
        builder: VocabBuilder,
        words: Vec<Word>,
        groups: Vec<Option<PenaltyWeights<W>>>,
        alphabet: AlphabetClass,
    ) -> Self {
        let group_count = groups.len();
        let chunk = (words.len() / (rayon::current_num_threads() * 4)).max(1024);
        let partials: Vec<_> = words
            .par_chunks(chunk)
            .enumerate()
            .map(|(chunk_idx, slice)| {
                let mut counts: FxHashMap<Pair, Box<[u64]>> = FxHashMap::default();
                let mut occurs: FxHashMap<Pair, Vec<u32>> = FxHashMap::default();
                for (offset, w) in slice.iter().enumerate() {
                    let idx = (chunk_idx * chunk + offset) as u32;
                    for_each_pair(&w.syms, |p| {
                        counts.entry(p).or_insert_with(|| vec![0; group_count].into())[w.group] += w.count;
                        let list = occurs.entry(p).or_default();
                        if list.last() != Some(&idx) {
                            list.push(idx);
                        }
                    });
                }
                (counts, occurs)
            })
            .collect();

        // Chunks are folded in index order; integer sums and the ascending
        // occurrence lists come out identical for any thread count.
        let mut counts: FxHashMap<Pair, Box<[u64]>> = FxHashMap::default();
        let mut occurs_in: FxHashMap<Pair, Vec<u32>> = FxHashMap::default();
        for (c, o) in partials {
            for (p, v) in c {
                match counts.get_mut(&p) {
                    Some(total) => total.iter_mut().zip(v.iter()).for_each(|(t, x)| *t += x),
                    None => {
                        counts.insert(p, v);
                    }
                }
            }
            for (p, list) in o {
                occurs_in.entry(p).or_default().extend(list);
            }
        }

        Engine {
            words,
            counts,
            occurs_in,
            groups,
            alphabet,
            builder,
        }
    }

    pub fn candidate(&self, pair: Pair) -> Option<Candidate<W>> {
        let per_group = self.counts.get(&pair)?;
        let raw: u64 = per_group.iter().sum();
        if raw == 0 {
            return None;
        }
        let left = self.builder.symbol_arc(pair.0).expect("pair symbols exist");
        let right = self.builder.symbol_arc(pair.1).expect("pair symbols exist");
        let mut merged = Vec::with_capacity(left.len() + right.len());
        merged.extend_from_slice(&left);
        merged.extend_from_slice(&right);
        let mut adjusted = W::zero();
        for (g, &c) in per_group.iter().enumerate() {
            if c == 0 {
                continue;
            }
            adjusted = adjusted
                + match &self.groups[g] {
                    Some(weights) => weights.adjust(c, &merged, self.alphabet),
                    None => W::from_count(c),
                };
        }
        Some(Candidate {
            pair,
            raw,
            adjusted,
            left,
            right,
        })
    }

    /// Every live bigram, best first.
    pub fn all_candidates(&self) -> Vec<Candidate<W>> {
        let mut pairs: Vec<Pair> = self.counts.keys().copied().collect();
        pairs.sort_unstable();
        let mut all: Vec<Candidate<W>> = pairs.into_iter().filter_map(|p| self.candidate(p)).collect();
        all.sort_by(|a, b| b.cmp(a));
        all
    }

    /// Merge until the vocabulary holds `target_size` entries or no bigram
    /// keeps an adjusted count of at least one.
    pub fn run(&mut self, target_size: usize) -> Result<(), VocabError> {
        let mut heap: BinaryHeap<Candidate<W>> = self.all_candidates().into();
        let one = W::one();
        while self.builder.len() < target_size {
            let Some(top) = heap.pop() else { break };
            let Some(live) = self.candidate(top.pair) else { continue };
            if !live.same_standing(&top) {
                heap.push(live);
                continue;
            }
            if live.adjusted.weight_cmp(&one) == Ordering::Less {
                break;
            }
            if self.builder.contains_bytes(&live.merged()) {
                // Another merge path already produced these bytes.
                continue;
            }
            let merged_id = self.builder.push_merge(live.pair.0, live.pair.1, live.raw, live.adjusted.to_f64())?;
            for fresh in self.merge_everywhere(live.pair, merged_id) {
                if let Some(c) = self.candidate(fresh) {
                    heap.push(c);
                }
            }
        }
        Ok(())
    }

    /// Rewrite `pair` in every word holding it and update counts. Returns the
    /// new pairs that involve `merged_id`.
    fn merge_everywhere(&mut self, pair: Pair, merged_id: u32) -> Vec<Pair> {
        let mut holders = self.occurs_in.remove(&pair).unwrap_or_default();
        holders.sort_unstable();
        holders.dedup();
        let group_count = self.groups.len();
        let mut fresh: Vec<Pair> = Vec::new();
        let mut before = Vec::new();
        for &wi in &holders {
            let word = &mut self.words[wi as usize];
            before.clear();
            for_each_pair(&word.syms, |p| before.push(p));
            if !before.contains(&pair) {
                continue;
            }
            apply_merge(&mut word.syms, pair, merged_id);
            let (count, group) = (word.count, word.group);
            for p in &before {
                if let Some(c) = self.counts.get_mut(p) {
                    c[group] -= count;
                }
            }
            let counts = &mut self.counts;
            let occurs_in = &mut self.occurs_in;
            for_each_pair(&self.words[wi as usize].syms, |p| {
                counts.entry(p).or_insert_with(|| vec![0; group_count].into())[group] += count;
                if p.0 == merged_id || p.1 == merged_id {
                    let list = occurs_in.entry(p).or_default();
                    if list.last() != Some(&wi) {
                        list.push(wi);
                    }
                    fresh.push(p);
                }
            });
        }
        self.counts.remove(&pair);
        fresh.sort_unstable();
        fresh.dedup();
        fresh
    }
}
