use serde::Serialize;

use super::MetricsError;
use crate::script::is_han;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LangLabel {
    English,
    Mandarin,
    Unknown,
}

impl std::str::FromStr for LangLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(LangLabel::English),
            "zh" | "mandarin" => Ok(LangLabel::Mandarin),
            "unknown" => Ok(LangLabel::Unknown),
            other => Err(format!("unknown language label `{other}`")),
        }
    }
}

/// Script vote: more Han characters than ASCII letters means Mandarin, the
/// reverse means English. An exact tie goes to whichever script appears
/// first; text with neither is `Unknown`.
pub fn classify_language(text: &str) -> LangLabel {
    let mut han = 0usize;
    let mut latin = 0usize;
    let mut first = LangLabel::Unknown;
    for c in text.chars() {
        let label = if is_han(c) {
            han += 1;
            LangLabel::Mandarin
        } else if c.is_ascii_alphabetic() {
            latin += 1;
            LangLabel::English
        } else {
            continue;
        };
        if first == LangLabel::Unknown {
            first = label;
        }
    }
    match han.cmp(&latin) {
        std::cmp::Ordering::Greater => LangLabel::Mandarin,
        std::cmp::Ordering::Less => LangLabel::English,
        std::cmp::Ordering::Equal => first,
    }
}

/// Wrong-language rates per true language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionReport {
    pub english_total: usize,
    pub english_wrong: usize,
    /// `None` when there are no English utterances.
    pub english_rate: Option<f64>,
    pub mandarin_total: usize,
    pub mandarin_wrong: usize,
    pub mandarin_rate: Option<f64>,
}

/// Fraction of hypotheses classified as the other language. `Unknown`
/// classifications do not count as wrong.
pub fn confusion_report<S: AsRef<str>>(labels: &[LangLabel], hyps: &[S]) -> Result<ConfusionReport, MetricsError> {
    if labels.len() != hyps.len() {
        return Err(MetricsError::Input(format!(
            "{} labels but {} hypotheses",
            labels.len(),
            hyps.len()
        )));
    }
    let mut totals = [0usize; 2];
    let mut wrong = [0usize; 2];
    for (label, hyp) in labels.iter().zip(hyps) {
        let slot = match label {
            LangLabel::English => 0,
            LangLabel::Mandarin => 1,
            LangLabel::Unknown => return Err(MetricsError::Input("true labels must be English or Mandarin".into())),
        };
        totals[slot] += 1;
        let got = classify_language(hyp.as_ref());
        if got != LangLabel::Unknown && got != *label {
            wrong[slot] += 1;
        }
    }
    let rate = |w: usize, t: usize| (t > 0).then(|| w as f64 / t as f64);
    Ok(ConfusionReport {
        english_total: totals[0],
        english_wrong: wrong[0],
        english_rate: rate(wrong[0], totals[0]),
        mandarin_total: totals[1],
        mandarin_wrong: wrong[1],
        mandarin_rate: rate(wrong[1], totals[1]),
    })
}
