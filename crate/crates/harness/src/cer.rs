//! Character error rate scoring: Levenshtein distance over Unicode scalar
//! values after text normalization.
//!
//! Normalization policy (recorded in output metadata, comparable only
//! within one policy): lowercase, strip punctuation and symbols, collapse
//! whitespace runs to single spaces.

use pdqc_core::Error;

/// One reference/hypothesis comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CerResult {
    pub reference: String,
    pub hypothesis: String,
    pub distance: usize,
    /// distance / reference length; can exceed 1 for long hypotheses and
    /// is reported as-is.
    pub cer: f64,
}

/// Identifier for the normalization policy applied before scoring.
pub const NORMALIZATION_POLICY: &str = "lowercase.strip-punct-sym.collapse-ws";

/// Lowercase, drop characters that are neither alphanumeric nor
/// whitespace, and collapse whitespace runs to single spaces.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if !c.is_alphanumeric() {
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        for lc in c.to_lowercase() {
            out.push(lc);
        }
    }
    out
}

/// Minimum number of unit-cost insertions, deletions, and substitutions
/// transforming `hyp` into `reference`, over Unicode scalar values.
pub fn levenshtein(reference: &str, hyp: &str) -> usize {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hyp.chars().collect();
    if r.is_empty() {
        return h.len();
    }
    if h.is_empty() {
        return r.len();
    }
    // Two-row dynamic program over the edit matrix.
    let mut prev: Vec<usize> = (0..=h.len()).collect();
    let mut cur = vec![0usize; h.len() + 1];
    for (i, &rc) in r.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &hc) in h.iter().enumerate() {
            let sub = prev[j] + usize::from(rc != hc);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[h.len()]
}

/// Levenshtein distance normalized by the reference length.
pub fn cer(reference: &str, hypothesis: &str) -> Result<CerResult, Error> {
    let ref_len = reference.chars().count();
    if ref_len == 0 {
        return Err(Error::EmptyReference);
    }
    let distance = levenshtein(reference, hypothesis);
    Ok(CerResult {
        reference: reference.to_string(),
        hypothesis: hypothesis.to_string(),
        distance,
        cer: distance as f64 / ref_len as f64,
    })
}
