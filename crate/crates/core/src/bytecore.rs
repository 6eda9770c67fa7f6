//! UTF-8 byte primitives and recovery of valid text from arbitrary bytes.

use serde::Serialize;

/// Encode text as its UTF-8 bytes.
pub fn text_to_bytes(text: &str) -> Vec<u8> {
    text.as_bytes().to_vec()
}

/// Decoder state between bytes of one codeword, following the well-formed
/// byte-sequence table of the Unicode standard. Each state fixes the range
/// the next byte must fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub(crate) enum Utf8State {
    /// Between codewords.
    Start = 0,
    /// One continuation byte left.
    Tail1,
    /// Two continuation bytes left.
    Tail2,
    /// Three continuation bytes left.
    Tail3,
    /// After `E0`: next in `A0..=BF`.
    AfterE0,
    /// After `ED`: next in `80..=9F` (excludes surrogates).
    AfterED,
    /// After `F0`: next in `90..=BF`.
    AfterF0,
    /// After `F4`: next in `80..=8F` (caps at U+10FFFF).
    AfterF4,
}

pub(crate) const UTF8_STATES: usize = 8;

impl Utf8State {
    /// Transition on `byte`, or `None` if the byte cannot follow.
    pub(crate) fn step(self, byte: u8) -> Option<Utf8State> {
        use Utf8State::*;
        let cont = (0x80..=0xBF).contains(&byte);
        match self {
            Start => match byte {
                0x00..=0x7F => Some(Start),
                0xC2..=0xDF => Some(Tail1),
                0xE0 => Some(AfterE0),
                0xE1..=0xEC | 0xEE..=0xEF => Some(Tail2),
                0xED => Some(AfterED),
                0xF0 => Some(AfterF0),
                0xF1..=0xF3 => Some(Tail3),
                0xF4 => Some(AfterF4),
                _ => None,
            },
            Tail1 => cont.then_some(Start),
            Tail2 => cont.then_some(Tail1),
            Tail3 => cont.then_some(Tail2),
            AfterE0 => (0xA0..=0xBF).contains(&byte).then_some(Tail1),
            AfterED => (0x80..=0x9F).contains(&byte).then_some(Tail1),
            AfterF0 => (0x90..=0xBF).contains(&byte).then_some(Tail2),
            AfterF4 => (0x80..=0x8F).contains(&byte).then_some(Tail2),
        }
    }
}

/// True iff `bytes` is well-formed UTF-8 (no overlongs, surrogates, or
/// scalars above U+10FFFF).
pub fn is_valid_utf8(bytes: &[u8]) -> bool {
    bytes
        .iter()
        .try_fold(Utf8State::Start, |state, &b| state.step(b))
        == Some(Utf8State::Start)
}

/// ASCII letter test used by the alphabet penalty.
pub fn is_alphabetic_byte(byte: u8) -> bool {
    byte.is_ascii_alphabetic()
}

/// Which byte strings count as "alphabetic" for the alphabet penalty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum AlphabetClass {
    /// Every byte is an ASCII letter.
    #[default]
    Ascii,
    /// Valid UTF-8 whose characters are all Latin letters, including the
    /// accented letters of Latin-1 Supplement and Latin Extended-A/B.
    LatinExtended,
}

impl AlphabetClass {
    pub fn is_alphabetic(self, bytes: &[u8]) -> bool {
        if bytes.is_empty() {
            return false;
        }
        match self {
            AlphabetClass::Ascii => bytes.iter().all(|&b| is_alphabetic_byte(b)),
            AlphabetClass::LatinExtended => match std::str::from_utf8(bytes) {
                Ok(s) => s.chars().all(is_latin_letter),
                Err(_) => false,
            },
        }
    }
}

fn is_latin_letter(c: char) -> bool {
    c.is_ascii_alphabetic()
        || (matches!(c, '\u{C0}'..='\u{24F}') && c != '\u{D7}' && c != '\u{F7}' && c.is_alphabetic())
}

/// Valid text recovered from a byte sequence by deleting bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairResult {
    pub text: String,
    /// Input positions removed, ascending.
    pub dropped: Vec<usize>,
    pub kept_bytes: usize,
}

impl RepairResult {
    pub fn is_clean(&self) -> bool {
        self.dropped.is_empty()
    }
}

/// Recover the longest valid UTF-8 subsequence of `bytes`.
///
/// Among all byte-deleting repairs the result keeps the most bytes. When
/// several keep the same number, the one whose dropped-index list is
/// lexicographically smallest wins, i.e. earlier bytes are dropped first.
/// Linear in the input with one small table row per decoder state.
pub fn repair_utf8(bytes: &[u8]) -> RepairResult {
    const NEG: i32 = i32::MIN / 2;
    let n = bytes.len();
    // best[i][s]: most bytes keepable from bytes[i..] when entering in state s
    // and ending between codewords.
    let mut best = vec![[NEG; UTF8_STATES]; n + 1];
    best[n][Utf8State::Start as usize] = 0;
    for i in (0..n).rev() {
        for state in ALL_STATES {
            let skip = best[i + 1][state as usize];
            let take = match state.step(bytes[i]) {
                Some(next) if best[i + 1][next as usize] > NEG => 1 + best[i + 1][next as usize],
                _ => NEG,
            };
            best[i][state as usize] = skip.max(take);
        }
    }

    let mut kept = Vec::with_capacity(n);
    let mut dropped = Vec::new();
    let mut state = Utf8State::Start;
    for (i, &b) in bytes.iter().enumerate() {
        let here = best[i][state as usize];
        if best[i + 1][state as usize] == here {
            dropped.push(i);
        } else {
            kept.push(b);
            state = state.step(b).expect("table only takes valid transitions");
        }
    }
    debug_assert_eq!(state, Utf8State::Start);
    let text = String::from_utf8(kept).expect("repair yields well-formed UTF-8");
    RepairResult {
        kept_bytes: text.len(),
        text,
        dropped,
    }
}

const ALL_STATES: [Utf8State; UTF8_STATES] = [
    Utf8State::Start,
    Utf8State::Tail1,
    Utf8State::Tail2,
    Utf8State::Tail3,
    Utf8State::AfterE0,
    Utf8State::AfterED,
    Utf8State::AfterF0,
    Utf8State::AfterF4,
];
