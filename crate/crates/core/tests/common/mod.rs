//! Shared test support: seeded synthetic corpora and independent reference
//! implementations used as oracles.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A Zipf-distributed lexicon: `draw` returns entry `k` with probability
/// proportional to `1 / (k + 1)^s`.
pub struct Lexicon<T> {
    entries: Vec<T>,
    zipf: Zipf<f64>,
}

impl<T: Clone> Lexicon<T> {
    pub fn new(entries: Vec<T>, exponent: f64) -> Self {
        let zipf = Zipf::new(entries.len() as u64, exponent).expect("valid Zipf parameters");
        Lexicon { entries, zipf }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> &T {
        let k = self.zipf.sample(rng) as usize - 1;
        &self.entries[k]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Distinct Han characters in random order from the common CJK block, so
/// that frequency rank is unrelated to code point (and to lead byte).
pub fn han_alphabet<R: Rng>(rng: &mut R, count: usize) -> Vec<char> {
    let mut all: Vec<char> = (0x4E00u32..=0x9FA5).filter_map(char::from_u32).collect();
    all.shuffle(rng);
    all.truncate(count);
    all
}

/// Mandarin-like text: Zipf-distributed characters grouped into a Zipf
/// lexicon of one- to four-character words, written without spaces, one
/// utterance per line.
pub struct HanCorpus {
    words: Lexicon<String>,
}

impl HanCorpus {
    pub fn new(seed: u64) -> Self {
        let mut rng = rng(seed);
        let chars = Lexicon::new(han_alphabet(&mut rng, 6000), 1.0);
        let mut seen = HashSet::new();
        let mut words = Vec::new();
        while words.len() < 40_000 {
            let len = match rng.gen_range(0..100) {
                0..=29 => 1,
                30..=84 => 2,
                85..=94 => 3,
                _ => 4,
            };
            let word: String = (0..len).map(|_| *chars.draw(&mut rng)).collect();
            if seen.insert(word.clone()) {
                words.push(word);
            }
        }
        HanCorpus {
            words: Lexicon::new(words, 1.05),
        }
    }

    /// About `bytes` bytes of text.
    pub fn generate(&self, seed: u64, bytes: usize) -> String {
        let mut rng = rng(seed);
        let mut out = String::with_capacity(bytes + 64);
        while out.len() < bytes {
            let words = rng.gen_range(3..12);
            for _ in 0..words {
                out.push_str(self.words.draw(&mut rng));
            }
            out.push('\n');
        }
        out
    }
}

/// Random lowercase words with a Zipf lexicon, space separated.
pub fn english_lexicon<R: Rng>(rng: &mut R, size: usize) -> Lexicon<String> {
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    while words.len() < size {
        let len = rng.gen_range(1..=9);
        let word: String = (0..len)
            .map(|_| {
                // Rough English letter skew: low letters are more common.
                let k = (rng.gen::<f64>().powf(1.6) * 26.0) as u8;
                (b'a' + k.min(25)) as char
            })
            .collect();
        if seen.insert(word.clone()) {
            words.push(word);
        }
    }
    Lexicon::new(words, 1.0)
}

/// About `bytes` bytes of space-separated ASCII text.
pub fn ascii_corpus(seed: u64, bytes: usize) -> String {
    let mut rng = rng(seed);
    let lexicon = english_lexicon(&mut rng, 5000);
    let mut out = String::with_capacity(bytes + 64);
    while out.len() < bytes {
        let n = rng.gen_range(4..15);
        let line: Vec<&str> = (0..n).map(|_| lexicon.draw(&mut rng).as_str()).collect();
        out.push_str(&line.join(" "));
        if rng.gen_bool(0.3) {
            out.push_str(if rng.gen_bool(0.5) { "." } else { "," });
        }
        out.push('\n');
    }
    out
}

/// About `bytes` bytes of code-switched text: Mandarin utterances with
/// embedded English words, and English utterances.
pub fn mixed_corpus(seed: u64, bytes: usize) -> String {
    let mut rng = rng(seed);
    let english = english_lexicon(&mut rng, 3000);
    let han = HanCorpus::new(seed ^ 0x5eed);
    let mut out = String::with_capacity(bytes + 64);
    while out.len() < bytes {
        let n = rng.gen_range(2..8);
        let mut parts: Vec<String> = Vec::with_capacity(n);
        let english_line = rng.gen_bool(0.3);
        for _ in 0..n {
            if english_line || rng.gen_bool(0.2) {
                parts.push(english.draw(&mut rng).clone());
            } else {
                let k = rng.gen_range(1..4);
                parts.push((0..k).map(|_| han.words.draw(&mut rng).as_str()).collect());
            }
        }
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

/// One learned merge of the reference implementation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefMerge {
    pub left: Vec<u8>,
    pub right: Vec<u8>,
    pub count: u64,
}

/// Textbook BPE over byte strings.
///
/// Words are whitespace-separated pieces. A pair of distinct symbols counts
/// every adjacent occurrence; a pair of one repeated symbol counts
/// `floor(run / 2)` per maximal run, the replacements a left-to-right
/// rewrite makes. The best pair has the highest count, ties going to the
/// byte-wise smaller (left, right). A pair whose concatenation is already a
/// symbol is never merged. Stops after `max_merges` merges or when no pair
/// is left.
///
/// Counts are kept per word and recomputed from scratch for every word a
/// merge touches; the best pair is found by scanning all counts.
pub fn reference_bpe(text: &str, max_merges: usize) -> Vec<RefMerge> {
    let mut word_counts: HashMap<&str, u64> = HashMap::new();
    for w in text.split_whitespace() {
        *word_counts.entry(w).or_default() += 1;
    }
    let mut symbols: Vec<Vec<u8>> = (0..=255u8).map(|b| vec![b]).collect();
    let mut known: HashSet<Vec<u8>> = symbols.iter().cloned().collect();
    let mut words: Vec<(Vec<u32>, u64)> = word_counts
        .into_iter()
        .map(|(w, c)| (w.bytes().map(u32::from).collect(), c))
        .collect();
    let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
    for (syms, c) in &words {
        add_word_pairs(syms, *c as i64, &mut counts);
    }

    let mut merges = Vec::new();
    while merges.len() < max_merges {
        let best = counts
            .iter()
            .filter(|&(&(l, r), &c)| c > 0 && !known.contains(&[&symbols[l as usize][..], &symbols[r as usize][..]].concat()))
            .max_by(|(pa, ca), (pb, cb)| {
                let key = |p: &(u32, u32)| (symbols[p.0 as usize].clone(), symbols[p.1 as usize].clone());
                ca.cmp(cb).then_with(|| key(pb).cmp(&key(pa)))
            })
            .map(|(&p, &c)| (p, c));
        let Some(((left, right), count)) = best else { break };
        let joined = [&symbols[left as usize][..], &symbols[right as usize][..]].concat();
        let merged = symbols.len() as u32;
        for (syms, c) in &mut words {
            if !syms.windows(2).any(|w| w[0] == left && w[1] == right) {
                continue;
            }
            add_word_pairs(syms, -(*c as i64), &mut counts);
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == left && syms[i + 1] == right {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(syms[i]);
                    i += 1;
                }
            }
            *syms = out;
            add_word_pairs(syms, *c as i64, &mut counts);
        }
        known.insert(joined.clone());
        merges.push(RefMerge {
            left: symbols[left as usize].clone(),
            right: symbols[right as usize].clone(),
            count,
        });
        symbols.push(joined);
    }
    merges
}

/// Add `weight` times the pair counts of one word.
fn add_word_pairs(syms: &[u32], weight: i64, counts: &mut HashMap<(u32, u32), u64>) {
    let mut bump = |pair: (u32, u32), n: i64| {
        let slot = counts.entry(pair).or_default();
        *slot = (*slot as i64 + n * weight) as u64;
    };
    for w in syms.windows(2) {
        if w[0] != w[1] {
            bump((w[0], w[1]), 1);
        }
    }
    let mut i = 0;
    while i < syms.len() {
        let run = syms[i..].iter().take_while(|&&s| s == syms[i]).count();
        if run >= 2 {
            bump((syms[i], syms[i]), (run / 2) as i64);
        }
        i += run;
    }
}

/// Largest number of bytes of `bytes` that can be kept, in order, while
/// forming valid UTF-8, found by trying every subsequence.
pub fn max_valid_subsequence(bytes: &[u8]) -> usize {
    assert!(bytes.len() <= 20, "exhaustive search only for short inputs");
    let n = bytes.len();
    let mut best = 0;
    let mut kept = Vec::with_capacity(n);
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        kept.clear();
        kept.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| bytes[i]));
        if std::str::from_utf8(&kept).is_ok() {
            best = size;
        }
    }
    best
}

/// Edit distance by the recursive definition, memoized on suffix lengths.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&d) = memo.get(&(a.len(), b.len())) {
            return d;
        }
        let d = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo)
                .min(go(a, &b[1..], memo))
                .min(go(&a[1..], &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), d);
        d
    }
    go(a, b, &mut HashMap::new())
}
