use std::ops::Add;

use serde::Serialize;

/// Edit counts from a minimum-cost alignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignmentStats {
    pub deletions: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub ref_len: usize,
    pub hyp_len: usize,
    /// `(del + sub + ins) / ref_len`; infinite when the reference is empty
    /// but the hypothesis is not.
    pub error_rate: f64,
}

impl AlignmentStats {
    pub fn new(deletions: usize, substitutions: usize, insertions: usize, ref_len: usize, hyp_len: usize) -> Self {
        let edits = deletions + substitutions + insertions;
        let error_rate = match (edits, ref_len) {
            (0, _) => 0.0,
            (_, 0) => f64::INFINITY,
            (e, r) => e as f64 / r as f64,
        };
        AlignmentStats {
            deletions,
            substitutions,
            insertions,
            ref_len,
            hyp_len,
            error_rate,
        }
    }

    pub fn edits(&self) -> usize {
        self.deletions + self.substitutions + self.insertions
    }
}

impl Default for AlignmentStats {
    fn default() -> Self {
        AlignmentStats::new(0, 0, 0, 0, 0)
    }
}

impl Add for AlignmentStats {
    type Output = AlignmentStats;

    fn add(self, o: AlignmentStats) -> AlignmentStats {
        AlignmentStats::new(
            self.deletions + o.deletions,
            self.substitutions + o.substitutions,
            self.insertions + o.insertions,
            self.ref_len + o.ref_len,
            self.hyp_len + o.hyp_len,
        )
    }
}

/// Levenshtein alignment with unit costs.
///
/// Among minimum-cost alignments the one with the fewest deletions is
/// chosen, which is the same as preferring substitutions over
/// deletion/insertion pairs. Since `del - ins` is fixed by the lengths, the
/// three counts are then fully determined.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> AlignmentStats {
    let (n, m) = (reference.len(), hypothesis.len());
    // (cost, deletions) per cell, compared lexicographically; one row at a time.
    let mut prev: Vec<(usize, usize)> = (0..=m).map(|j| (j, 0)).collect();
    let mut cur = vec![(0usize, 0usize); m + 1];
    for i in 1..=n {
        cur[0] = (i, i);
        for j in 1..=m {
            let (dc, dd) = prev[j - 1];
            let diag = (dc + usize::from(reference[i - 1] != hypothesis[j - 1]), dd);
            let del = (prev[j].0 + 1, prev[j].1 + 1);
            let ins = (cur[j - 1].0 + 1, cur[j - 1].1);
            cur[j] = diag.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (cost, deletions) = prev[m];
    // del - ins = n - m
    let insertions = deletions + m - n;
    let substitutions = cost - deletions - insertions;
    AlignmentStats::new(deletions, substitutions, insertions, n, m)
}
