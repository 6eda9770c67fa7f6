//! Text to symbol ids and back.
//!
//! Encoding splits text on whitespace runs and segments each piece
//! independently: base symbols first, then merge rules in training rank
//! order. Decoding joins symbol bytes, inserting one space at each recorded
//! segment boundary, and repairs whatever is not valid UTF-8.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::bytecore::{repair_utf8, RepairResult};
use crate::vocab::Vocabulary;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("character {character:?} (U+{:04X}) is not in the vocabulary", *character as u32)]
    Oov { character: char },
    #[error("symbol id {id} is not in the vocabulary")]
    UnknownId { id: u32 },
    #[error("token sequence belongs to vocabulary {found}, not {expected}")]
    VocabMismatch { expected: String, found: String },
}

/// Symbol ids bound to the vocabulary that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    ids: Vec<u32>,
    vocab_fingerprint: String,
    special_count: u32,
    /// Positions in `ids` where a new whitespace-separated segment begins.
    /// `None` for id streams that carry no boundary information.
    boundaries: Option<Vec<usize>>,
}

impl TokenSeq {
    /// Bind an externally produced id stream (e.g. model output) to `vocab`.
    pub fn from_ids(ids: Vec<u32>, vocab: &Vocabulary) -> Result<Self, CodecError> {
        if let Some(&id) = ids.iter().find(|&&id| id as usize >= vocab.len()) {
            return Err(CodecError::UnknownId { id });
        }
        Ok(TokenSeq {
            ids,
            vocab_fingerprint: vocab.fingerprint().to_owned(),
            special_count: vocab.special_count() as u32,
            boundaries: None,
        })
    }

    /// Bind ids grouped into whitespace-separated segments, the inverse of
    /// [`TokenSeq::segments`].
    pub fn from_segments(segments: Vec<Vec<u32>>, vocab: &Vocabulary) -> Result<Self, CodecError> {
        let mut boundaries = Vec::with_capacity(segments.len().saturating_sub(1));
        let mut ids = Vec::new();
        for (i, seg) in segments.into_iter().enumerate() {
            if i > 0 {
                boundaries.push(ids.len());
            }
            ids.extend(seg);
        }
        let mut seq = TokenSeq::from_ids(ids, vocab)?;
        seq.boundaries = Some(boundaries);
        Ok(seq)
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn vocab_fingerprint(&self) -> &str {
        &self.vocab_fingerprint
    }

    pub fn boundaries(&self) -> Option<&[usize]> {
        self.boundaries.as_deref()
    }

    /// The ids split at segment boundaries; one group when none are known.
    pub fn segments(&self) -> Vec<&[u32]> {
        let Some(bounds) = &self.boundaries else {
            return vec![&self.ids];
        };
        let mut out = Vec::with_capacity(bounds.len() + 1);
        let mut start = 0;
        for &b in bounds {
            out.push(&self.ids[start..b]);
            start = b;
        }
        out.push(&self.ids[start..]);
        out
    }

    /// Drop boundary information, as a model emitting these ids would.
    pub fn without_boundaries(mut self) -> Self {
        self.boundaries = None;
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Number of non-special symbols.
pub fn seq_length(tokens: &TokenSeq) -> usize {
    tokens.ids.iter().filter(|&&id| id >= tokens.special_count).count()
}

/// Encoder with a per-segment cache, for encoding many lines.
pub struct Encoder<'v> {
    vocab: &'v Vocabulary,
    cache: HashMap<String, Vec<u32>>,
}

impl<'v> Encoder<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Self {
        Encoder {
            vocab,
            cache: HashMap::new(),
        }
    }

    pub fn encode(&mut self, text: &str) -> Result<TokenSeq, CodecError> {
        let mut ids = Vec::new();
        let mut boundaries = Vec::new();
        for (i, segment) in text.split_whitespace().enumerate() {
            if i > 0 {
                boundaries.push(ids.len());
            }
            match self.cache.get(segment) {
                Some(cached) => ids.extend_from_slice(cached),
                None => {
                    let seg_ids = encode_segment(segment, self.vocab)?;
                    ids.extend_from_slice(&seg_ids);
                    self.cache.insert(segment.to_owned(), seg_ids);
                }
            }
        }
        Ok(TokenSeq {
            ids,
            vocab_fingerprint: self.vocab.fingerprint().to_owned(),
            special_count: self.vocab.special_count() as u32,
            boundaries: Some(boundaries),
        })
    }
}

/// Encode `text` under `vocab`. Byte-level vocabularies accept any text;
/// character-level ones fail on characters they have never seen.
pub fn encode(text: &str, vocab: &Vocabulary) -> Result<TokenSeq, CodecError> {
    Encoder::new(vocab).encode(text)
}

fn encode_segment(segment: &str, vocab: &Vocabulary) -> Result<Vec<u32>, CodecError> {
    let specials = vocab.special_count() as u32;
    let mut syms: Vec<u32> = if vocab.mode().is_byte_level() {
        segment.bytes().map(|b| specials + u32::from(b)).collect()
    } else {
        let mut buf = [0u8; 4];
        segment
            .chars()
            .map(|c| {
                vocab
                    .id_of(c.encode_utf8(&mut buf).as_bytes())
                    .ok_or(CodecError::Oov { character: c })
            })
            .collect::<Result<_, _>>()?
    };

    // Applying every rule in rank order is the same as repeatedly applying
    // the lowest-ranked rule whose pair is present: a merge never creates an
    // adjacency between two older symbols.
    loop {
        let best = syms
            .windows(2)
            .filter_map(|w| vocab.merge_for(w[0], w[1]))
            .min_by_key(|m| m.rank);
        let Some(rule) = best else { break };
        let (pair, merged) = ((rule.left, rule.right), rule.result);
        let mut out = Vec::with_capacity(syms.len());
        let mut i = 0;
        while i < syms.len() {
            if i + 1 < syms.len() && (syms[i], syms[i + 1]) == pair {
                out.push(merged);
                i += 2;
            } else {
                out.push(syms[i]);
                i += 1;
            }
        }
        syms = out;
    }
    Ok(syms)
}

/// Decoded text together with the repair that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decoded {
    pub text: String,
    pub repair: RepairResult,
}

/// Decode a bound token sequence. Special tokens are dropped; segment
/// boundaries, when known, become single spaces.
pub fn decode(tokens: &TokenSeq, vocab: &Vocabulary) -> Result<Decoded, CodecError> {
    if tokens.vocab_fingerprint != vocab.fingerprint() {
        return Err(CodecError::VocabMismatch {
            expected: vocab.fingerprint().to_owned(),
            found: tokens.vocab_fingerprint.clone(),
        });
    }
    let bounds = tokens.boundaries.as_deref().unwrap_or(&[]);
    let mut bytes = Vec::new();
    let mut next_bound = bounds.iter().peekable();
    for (i, &id) in tokens.ids.iter().enumerate() {
        while next_bound.next_if(|&&b| b <= i).is_some() {
            if !bytes.is_empty() {
                bytes.push(b' ');
            }
        }
        if vocab.is_special(id) {
            continue;
        }
        let sym = vocab.symbol(id).ok_or(CodecError::UnknownId { id })?;
        bytes.extend_from_slice(sym.bytes());
    }
    let repair = repair_utf8(&bytes);
    Ok(Decoded {
        text: repair.text.clone(),
        repair,
    })
}

/// Decode raw ids by plain concatenation, as for model output.
pub fn decode_ids(ids: &[u32], vocab: &Vocabulary) -> Result<Decoded, CodecError> {
    decode(&TokenSeq::from_ids(ids.to_vec(), vocab)?, vocab)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::vocab::{Mode, VocabBuilder, DEFAULT_SPECIALS};

    fn with_merges(mode: Mode, chars: &str, merges: &[(&[u8], &[u8])]) -> Vocabulary {
        let mut b = VocabBuilder::base_for_mode(mode, DEFAULT_SPECIALS, chars.chars()).unwrap();
        for (l, r) in merges {
            let (l, r) = (b.id_of(l).unwrap(), b.id_of(r).unwrap());
            b.push_merge(l, r, 1, 1.0).unwrap();
        }
        b.finish(None, BTreeMap::new()).unwrap()
    }

    #[test]
    fn byte_mode_encodes_every_byte() {
        let v = Vocabulary::byte_level(DEFAULT_SPECIALS);
        let t = encode("你", &v).unwrap();
        assert_eq!(t.ids(), &[6 + 0xE4, 6 + 0xBD, 6 + 0xA0]);
    }

    #[test]
    fn merges_apply_greedily() {
        let v = with_merges(Mode::Bbpe, "", &[(b"a", b"a")]);
        assert_eq!(encode("aa", &v).unwrap().len(), 1);
        let aaa = encode("aaa", &v).unwrap();
        assert_eq!(aaa.ids(), &[v.id_of(b"aa").unwrap(), v.id_of(b"a").unwrap()]);
    }

    #[test]
    fn rank_order_not_longest_match() {
        // rank 0: b+c, rank 1: a+b, rank 2: ab+c. "abc" -> a, bc.
        let v = with_merges(Mode::Bpe, "abc", &[(b"b", b"c"), (b"a", b"b"), (b"ab", b"c")]);
        let t = encode("abc", &v).unwrap();
        assert_eq!(t.ids(), &[v.id_of(b"a").unwrap(), v.id_of(b"bc").unwrap()]);
    }

    #[test]
    fn roundtrip_mixed_text() {
        let v = with_merges(Mode::Bbpe, "", &[(b"l", b"l"), (&[0xE4], &[0xBD])]);
        let t = encode("hello 你好", &v).unwrap();
        let d = decode(&t, &v).unwrap();
        assert_eq!(d.text, "hello 你好");
        assert!(d.repair.dropped.is_empty());
        assert_eq!(t.segments().len(), 2);
    }

    #[test]
    fn truncated_character_is_dropped() {
        let v = Vocabulary::byte_level(DEFAULT_SPECIALS);
        let d = decode_ids(&[6 + 0xE4, 6 + 0xBD], &v).unwrap();
        assert_eq!(d.text, "");
        assert_eq!(d.repair.dropped, vec![0, 1]);
    }

    #[test]
    fn specials_are_stripped() {
        let v = Vocabulary::byte_level(DEFAULT_SPECIALS);
        let bos = v.special_id("BOS").unwrap();
        let eos = v.special_id("EOS").unwrap();
        let ids = vec![bos, v.id_of(b"a").unwrap(), eos];
        assert_eq!(decode_ids(&ids, &v).unwrap().text, "a");
        assert_eq!(seq_length(&TokenSeq::from_ids(ids, &v).unwrap()), 1);
    }

    #[test]
    fn sequence_lengths() {
        let bytes = Vocabulary::byte_level(DEFAULT_SPECIALS);
        let han = "一二三四五六七八九十";
        assert_eq!(seq_length(&encode(han, &bytes).unwrap()), 30);
        let chars = Vocabulary::character(DEFAULT_SPECIALS, "你好".chars()).unwrap();
        assert_eq!(seq_length(&encode("你好", &chars).unwrap()), 2);
    }

    #[test]
    fn errors() {
        let chars = Vocabulary::character(DEFAULT_SPECIALS, "ab".chars()).unwrap();
        assert_eq!(encode("abc", &chars).unwrap_err(), CodecError::Oov { character: 'c' });
        assert_eq!(
            TokenSeq::from_ids(vec![999], &chars).unwrap_err(),
            CodecError::UnknownId { id: 999 }
        );
        let other = Vocabulary::byte_level(DEFAULT_SPECIALS);
        let t = encode("ab", &chars).unwrap();
        assert!(matches!(decode(&t, &other), Err(CodecError::VocabMismatch { .. })));
    }

    #[test]
    fn boundaries_survive_specials_at_edges() {
        let v = Vocabulary::byte_level(DEFAULT_SPECIALS);
        let t = encode("a b", &v).unwrap();
        assert_eq!(t.boundaries(), Some(&[1][..]));
        assert_eq!(decode(&t, &v).unwrap().text, "a b");
        assert_eq!(decode(&t.without_boundaries(), &v).unwrap().text, "ab");
    }
}
