//! Length and alphabet penalties on bigram counts.

use crate::bytecore::AlphabetClass;
use crate::scalar::{complement, Weight};
use crate::vocab::PenaltyConfig;

/// Length-penalized count: `c` when the merged symbol is at most `cutoff_n`
/// bytes long, `(1 - alpha) * c` otherwise.
pub fn length_penalty<W: Weight>(count: W, merged_len: usize, alpha: &W, cutoff_n: usize) -> W {
    if merged_len <= cutoff_n {
        count
    } else {
        complement(alpha) * count
    }
}

/// Alphabet-penalized count: `(1 - beta) * lp` for an alphabetic merge,
/// `lp` otherwise.
pub fn alphabet_penalty<W: Weight>(lp: W, is_alphabetic: bool, beta: &W) -> W {
    if is_alphabetic {
        complement(beta) * lp
    } else {
        lp
    }
}

/// A [`PenaltyConfig`] lifted into the weight type.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights<W> {
    pub alpha: W,
    pub cutoff_n: usize,
    pub beta: W,
}

impl<W: Weight> PenaltyWeights<W> {
    pub fn new(config: &PenaltyConfig) -> Self {
        PenaltyWeights {
            alpha: W::from_factor(config.alpha),
            cutoff_n: config.cutoff_n,
            beta: W::from_factor(config.beta),
        }
    }

    /// Apply both penalties, length first, to a raw bigram count.
    pub fn adjust(&self, raw: u64, merged: &[u8], alphabet: AlphabetClass) -> W {
        let lp = length_penalty(W::from_count(raw), merged.len(), &self.alpha, self.cutoff_n);
        alphabet_penalty(lp, alphabet.is_alphabetic(merged), &self.beta)
    }
}

/// Visit each countable adjacent pair of `syms`.
///
/// Runs of one repeated symbol are paired greedily from the left, so `a a a`
/// yields `(a, a)` once: exactly the occurrences a left-to-right merge pass
/// would rewrite.
pub(crate) fn for_each_pair(syms: &[u32], mut f: impl FnMut((u32, u32))) {
    let mut claimed_until = None;
    for i in 0..syms.len().saturating_sub(1) {
        let pair = (syms[i], syms[i + 1]);
        if pair.0 == pair.1 {
            if claimed_until == Some(i) {
                claimed_until = None;
                continue;
            }
            claimed_until = Some(i + 1);
        }
        f(pair);
    }
}

/// Rewrite every greedy left-to-right occurrence of `pair` as `merged`.
/// Returns whether anything changed.
pub(crate) fn apply_merge(syms: &mut Vec<u32>, pair: (u32, u32), merged: u32) -> bool {
    let mut out = 0;
    let mut i = 0;
    let mut changed = false;
    while i < syms.len() {
        if i + 1 < syms.len() && syms[i] == pair.0 && syms[i + 1] == pair.1 {
            syms[out] = merged;
            i += 2;
            changed = true;
        } else {
            syms[out] = syms[i];
            i += 1;
        }
        out += 1;
    }
    syms.truncate(out);
    changed
}

#[cfg(test)]
mod tests {
    use num_rational::Ratio;

    use super::*;
    use crate::Rational;

    #[test]
    fn length_penalty_branches() {
        let alpha: Rational = Weight::from_factor(0.99);
        assert_eq!(length_penalty(Rational::from_count(1000), 3, &alpha, 3), Ratio::from_integer(1000));
        assert_eq!(length_penalty(Rational::from_count(1000), 4, &alpha, 3), Ratio::from_integer(10));
        let zero: Rational = Weight::from_factor(0.0);
        assert_eq!(length_penalty(Rational::from_count(500), 7, &zero, 3), Ratio::from_integer(500));
    }

    #[test]
    fn alphabet_penalty_branches() {
        let beta: Rational = Weight::from_factor(0.999);
        let thousand = Rational::from_count(1000);
        assert_eq!(alphabet_penalty(thousand, true, &beta), Ratio::from_integer(1));
        assert_eq!(alphabet_penalty(thousand, false, &beta), thousand);
        let zero: Rational = Weight::from_factor(0.0);
        assert_eq!(alphabet_penalty(Rational::from_count(42), true, &zero), Ratio::from_integer(42));
    }

    #[test]
    fn float_penalties_within_tolerance() {
        assert!((length_penalty(1000.0f64, 4, &0.99, 3) - 10.0).abs() < 1e-9);
        assert!((alphabet_penalty(1000.0f64, true, &0.999) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn combined_adjustment() {
        let w = PenaltyWeights::<Rational>::new(&PenaltyConfig::default());
        assert_eq!(w.adjust(100, b"th", AlphabetClass::Ascii), Ratio::new(1, 10));
        assert_eq!(w.adjust(100, b"thee", AlphabetClass::Ascii), Ratio::new(1, 1000));
        assert_eq!(w.adjust(100, "你".as_bytes(), AlphabetClass::Ascii), Ratio::from_integer(100));
        assert_eq!(w.adjust(100, "你好".as_bytes(), AlphabetClass::Ascii), Ratio::from_integer(1));
    }

    fn pairs(syms: &[u32]) -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for_each_pair(syms, |p| v.push(p));
        v
    }

    #[test]
    fn repeated_symbols_pair_greedily() {
        assert_eq!(pairs(&[1, 1, 1]), vec![(1, 1)]);
        assert_eq!(pairs(&[1, 1, 1, 1]), vec![(1, 1), (1, 1)]);
        assert_eq!(pairs(&[2, 1, 1, 1, 2]), vec![(2, 1), (1, 1), (1, 2)]);
        assert_eq!(pairs(&[1, 1, 2, 2]), vec![(1, 1), (1, 2), (2, 2)]);
        assert!(pairs(&[7]).is_empty());
        assert!(pairs(&[]).is_empty());
    }

    #[test]
    fn merge_rewrites_left_to_right() {
        let mut s = vec![1, 1, 1];
        assert!(apply_merge(&mut s, (1, 1), 9));
        assert_eq!(s, vec![9, 1]);
        let mut s = vec![1, 2, 1, 2, 3];
        assert!(apply_merge(&mut s, (1, 2), 9));
        assert_eq!(s, vec![9, 9, 3]);
        assert!(!apply_merge(&mut s, (1, 2), 9));
    }
}
