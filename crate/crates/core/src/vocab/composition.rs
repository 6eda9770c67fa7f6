use serde::Serialize;

use super::{Symbol, Vocabulary};
use crate::script::is_han;

/// Coarse category of a symbol's byte string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolClass {
    SingleByte,
    /// Exactly one complete Han character.
    CjkCharacter,
    /// Two or more complete Han characters and nothing else.
    CjkSequence,
    /// Two or more ASCII letters.
    AlphabeticMultibyte,
    /// Not valid UTF-8 on its own.
    InvalidFragment,
    Other,
}

impl SymbolClass {
    pub fn of(bytes: &[u8]) -> SymbolClass {
        if bytes.len() == 1 {
            return SymbolClass::SingleByte;
        }
        let Ok(text) = std::str::from_utf8(bytes) else {
            return SymbolClass::InvalidFragment;
        };
        if text.chars().all(is_han) {
            match text.chars().count() {
                1 => SymbolClass::CjkCharacter,
                _ => SymbolClass::CjkSequence,
            }
        } else if bytes.iter().all(u8::is_ascii_alphabetic) {
            SymbolClass::AlphabeticMultibyte
        } else {
            SymbolClass::Other
        }
    }
}

/// Counts of non-special symbols per [`SymbolClass`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CompositionStats {
    pub total: usize,
    pub single_byte: usize,
    pub cjk_character: usize,
    pub cjk_sequence: usize,
    pub alphabetic_multibyte: usize,
    pub invalid_fragment: usize,
    pub other: usize,
}

impl CompositionStats {
    pub fn from_symbols<'a>(symbols: impl IntoIterator<Item = &'a Symbol>) -> Self {
        let mut stats = CompositionStats::default();
        for s in symbols {
            stats.add(SymbolClass::of(s.bytes()));
        }
        stats
    }

    fn add(&mut self, class: SymbolClass) {
        self.total += 1;
        *self.slot(class) += 1;
    }

    fn slot(&mut self, class: SymbolClass) -> &mut usize {
        match class {
            SymbolClass::SingleByte => &mut self.single_byte,
            SymbolClass::CjkCharacter => &mut self.cjk_character,
            SymbolClass::CjkSequence => &mut self.cjk_sequence,
            SymbolClass::AlphabeticMultibyte => &mut self.alphabetic_multibyte,
            SymbolClass::InvalidFragment => &mut self.invalid_fragment,
            SymbolClass::Other => &mut self.other,
        }
    }

    pub fn count(&self, class: SymbolClass) -> usize {
        match class {
            SymbolClass::SingleByte => self.single_byte,
            SymbolClass::CjkCharacter => self.cjk_character,
            SymbolClass::CjkSequence => self.cjk_sequence,
            SymbolClass::AlphabeticMultibyte => self.alphabetic_multibyte,
            SymbolClass::InvalidFragment => self.invalid_fragment,
            SymbolClass::Other => self.other,
        }
    }

    /// Share of all non-special symbols in `class`; zero for an empty set.
    pub fn fraction(&self, class: SymbolClass) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(class) as f64 / self.total as f64
        }
    }

    pub fn fractions(&self) -> CompositionFractions {
        CompositionFractions {
            single_byte: self.fraction(SymbolClass::SingleByte),
            cjk_character: self.fraction(SymbolClass::CjkCharacter),
            cjk_sequence: self.fraction(SymbolClass::CjkSequence),
            alphabetic_multibyte: self.fraction(SymbolClass::AlphabeticMultibyte),
            invalid_fragment: self.fraction(SymbolClass::InvalidFragment),
            other: self.fraction(SymbolClass::Other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionFractions {
    pub single_byte: f64,
    pub cjk_character: f64,
    pub cjk_sequence: f64,
    pub alphabetic_multibyte: f64,
    pub invalid_fragment: f64,
    pub other: f64,
}

impl CompositionFractions {
    pub fn sum(&self) -> f64 {
        self.single_byte
            + self.cjk_character
            + self.cjk_sequence
            + self.alphabetic_multibyte
            + self.invalid_fragment
            + self.other
    }
}

impl Vocabulary {
    /// Breakdown of non-special symbols by [`SymbolClass`].
    pub fn composition_report(&self) -> CompositionStats {
        CompositionStats::from_symbols(self.symbols())
    }
}
