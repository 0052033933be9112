//! BLEU, NIST and normalized edit distance.
//!
//! BLEU and NIST work on lowercased whitespace tokens with one reference per
//! hypothesis. BLEU uses clipped n-gram precisions for n = 1..4 and the
//! brevity penalty `exp(1 - r/h)` when `h < r`; a zero count for n ≥ 2 is
//! smoothed to `1 / (total + 1)` so that short but exact hypotheses still
//! score 100. NIST sums information-weighted matches for n = 1..5, with
//! information weights taken from the reference corpus, and applies the
//! brevity factor `exp(β · ln²(min(h/r, 1)))` with β chosen so that the
//! factor is 0.5 at `h/r = 2/3`.
//!
//! DIST is `100 · (1 - lev(h, r) / max(|h|, |r|))` over characters, after
//! lowercasing, removing punctuation and collapsing whitespace. It is not
//! the official shared-task script.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

pub const BLEU_ORDER: usize = 4;
pub const NIST_ORDER: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },
}

/// Lowercased whitespace tokens.
pub fn tokenize(s: &str) -> Vec<String> {
    crate::text::lower_tokens(s)
}

type Counts<'a> = HashMap<&'a [String], usize>;

fn ngram_counts(toks: &[String], n: usize) -> Counts<'_> {
    let mut c = Counts::new();
    if toks.len() >= n {
        for g in toks.windows(n) {
            *c.entry(g).or_insert(0) += 1;
        }
    }
    c
}

/// Clipped matches and total hypothesis n-grams.
fn matches(hyp: &[String], refr: &[String], n: usize) -> (usize, usize) {
    let h = ngram_counts(hyp, n);
    let r = ngram_counts(refr, n);
    let matched = h.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum();
    (matched, hyp.len().saturating_sub(n - 1))
}

fn check(h: usize, r: usize) -> Result<(), EvalError> {
    if h != r {
        return Err(EvalError::LengthMismatch { hyps: h, refs: r });
    }
    Ok(())
}

/// Corpus BLEU in [0, 100] over tokenized sentences.
pub fn bleu(hyps: &[Vec<String>], refs: &[Vec<String>]) -> Result<f64, EvalError> {
    check(hyps.len(), refs.len())?;
    let mut matched = [0usize; BLEU_ORDER];
    let mut total = [0usize; BLEU_ORDER];
    let (mut h_len, mut r_len) = (0usize, 0usize);
    for (h, r) in hyps.iter().zip(refs) {
        h_len += h.len();
        r_len += r.len();
        for n in 1..=BLEU_ORDER {
            let (m, t) = matches(h, r, n);
            matched[n - 1] += m;
            total[n - 1] += t;
        }
    }
    Ok(bleu_from_counts(&matched, &total, h_len, r_len))
}

fn bleu_from_counts(matched: &[usize; BLEU_ORDER], total: &[usize; BLEU_ORDER], h_len: usize, r_len: usize) -> f64 {
    if matched[0] == 0 || h_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..BLEU_ORDER {
        let (m, t) = (matched[n] as f64, total[n] as f64);
        let p = if n > 0 && matched[n] == 0 { 1.0 / (t + 1.0) } else { m / t };
        log_sum += p.ln();
    }
    let bp = if h_len < r_len {
        (1.0 - r_len as f64 / h_len as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * (log_sum / BLEU_ORDER as f64).exp()
}

/// NIST information weights estimated from a reference corpus.
#[derive(Clone, Debug)]
pub struct NistWeights {
    counts: HashMap<Vec<String>, usize>,
    words: usize,
}

impl NistWeights {
    pub fn from_references(refs: &[Vec<String>]) -> Self {
        let mut counts = HashMap::new();
        let mut words = 0;
        for r in refs {
            words += r.len();
            for n in 1..=NIST_ORDER {
                for (g, c) in ngram_counts(r, n) {
                    *counts.entry(g.to_vec()).or_insert(0) += c;
                }
            }
        }
        NistWeights { counts, words }
    }

    /// `log2(count(prefix) / count(ngram))`, where the prefix of a unigram
    /// is the whole corpus. `None` for n-grams absent from the references.
    pub fn info(&self, ngram: &[String]) -> Option<f64> {
        let c = *self.counts.get(ngram)?;
        let prefix = if ngram.len() == 1 {
            self.words
        } else {
            self.counts[&ngram[..ngram.len() - 1]]
        };
        Some((prefix as f64 / c as f64).log2())
    }
}

fn nist_beta() -> f64 {
    0.5f64.ln() / (2.0f64 / 3.0).ln().powi(2)
}

fn nist_brevity(h_len: usize, r_len: usize) -> f64 {
    if h_len == 0 || r_len == 0 {
        return if h_len == 0 { 0.0 } else { 1.0 };
    }
    let ratio = (h_len as f64 / r_len as f64).min(1.0);
    (nist_beta() * ratio.ln().powi(2)).exp()
}

/// Information gained from clipped n-gram matches of one hypothesis.
fn nist_info(hyp: &[String], refr: &[String], n: usize, w: &NistWeights) -> f64 {
    let h = ngram_counts(hyp, n);
    let r = ngram_counts(refr, n);
    let mut info = 0.0;
    for (g, &c) in &h {
        let m = c.min(r.get(g).copied().unwrap_or(0));
        if m > 0 {
            info += m as f64 * w.info(g).unwrap_or(0.0);
        }
    }
    info
}

fn nist_with(hyps: &[Vec<String>], refs: &[Vec<String>], w: &NistWeights) -> f64 {
    let mut score = 0.0;
    for n in 1..=NIST_ORDER {
        let mut info = 0.0;
        let mut total = 0usize;
        for (h, r) in hyps.iter().zip(refs) {
            info += nist_info(h, r, n, w);
            total += h.len().saturating_sub(n - 1);
        }
        if total > 0 {
            score += info / total as f64;
        }
    }
    let h_len = hyps.iter().map(Vec::len).sum();
    let r_len = refs.iter().map(Vec::len).sum();
    score * nist_brevity(h_len, r_len)
}

/// Corpus NIST over tokenized sentences.
pub fn nist(hyps: &[Vec<String>], refs: &[Vec<String>]) -> Result<f64, EvalError> {
    check(hyps.len(), refs.len())?;
    Ok(nist_with(hyps, refs, &NistWeights::from_references(refs)))
}

/// Lowercases, removes punctuation and collapses whitespace.
pub fn normalize_for_dist(s: &str) -> String {
    crate::text::strip_punct(&s.to_lowercase())
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Character-level edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

/// Normalized edit similarity in [0, 100].
pub fn dist(hypothesis: &str, reference: &str) -> f64 {
    let h = normalize_for_dist(hypothesis);
    let r = normalize_for_dist(reference);
    let longest = h.chars().count().max(r.chars().count());
    if longest == 0 {
        return 100.0;
    }
    100.0 * (1.0 - levenshtein(&h, &r) as f64 / longest as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceScores {
    pub bleu: f64,
    pub nist: f64,
    pub dist: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub bleu: f64,
    pub nist: f64,
    /// Mean of the per-sentence DIST values.
    pub dist: f64,
    pub per_sentence: Vec<SentenceScores>,
    pub sentences: usize,
    pub hypothesis_tokens: usize,
    pub reference_tokens: usize,
}

impl EvalReport {
    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{:<8} {:>10}", "metric", "value").unwrap();
        writeln!(s, "{:<8} {:>10.2}", "BLEU", self.bleu).unwrap();
        writeln!(s, "{:<8} {:>10.2}", "NIST", self.nist).unwrap();
        writeln!(s, "{:<8} {:>10.2}", "DIST", self.dist).unwrap();
        writeln!(s, "{:<8} {:>10}", "sents", self.sentences).unwrap();
        writeln!(s, "{:<8} {:>10}", "hyp_toks", self.hypothesis_tokens).unwrap();
        writeln!(s, "{:<8} {:>10}", "ref_toks", self.reference_tokens).unwrap();
        s
    }

    /// One `metric<TAB>value` line per metric.
    pub fn to_tsv(&self) -> String {
        format!(
            "bleu\t{:.4}\nnist\t{:.4}\ndist\t{:.4}\nsentences\t{}\nhypothesis_tokens\t{}\nreference_tokens\t{}\n",
            self.bleu, self.nist, self.dist, self.sentences, self.hypothesis_tokens, self.reference_tokens
        )
    }
}

/// Scores aligned hypothesis and reference sentences.
pub fn evaluate<S: AsRef<str>>(hypotheses: &[S], references: &[S]) -> Result<EvalReport, EvalError> {
    check(hypotheses.len(), references.len())?;
    let hyps: Vec<Vec<String>> = hypotheses.iter().map(|s| tokenize(s.as_ref())).collect();
    let refs: Vec<Vec<String>> = references.iter().map(|s| tokenize(s.as_ref())).collect();
    let weights = NistWeights::from_references(&refs);
    let per_sentence: Vec<SentenceScores> = hyps
        .iter()
        .zip(&refs)
        .zip(hypotheses.iter().zip(references))
        .map(|((h, r), (hs, rs))| {
            let one_h = std::slice::from_ref(h);
            let one_r = std::slice::from_ref(r);
            SentenceScores {
                bleu: bleu(one_h, one_r).unwrap(),
                nist: nist_with(one_h, one_r, &weights),
                dist: dist(hs.as_ref(), rs.as_ref()),
            }
        })
        .collect();
    let dist = if per_sentence.is_empty() {
        0.0
    } else {
        per_sentence.iter().map(|s| s.dist).sum::<f64>() / per_sentence.len() as f64
    };
    Ok(EvalReport {
        bleu: bleu(&hyps, &refs)?,
        nist: nist_with(&hyps, &refs, &weights),
        dist,
        per_sentence,
        sentences: hyps.len(),
        hypothesis_tokens: hyps.iter().map(Vec::len).sum(),
        reference_tokens: refs.iter().map(Vec::len).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    fn corpus(xs: &[&str]) -> Vec<Vec<String>> {
        xs.iter().map(|s| toks(s)).collect()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn bleu_identity_and_disjoint() {
        let c = corpus(&["the boy reads a book .", "a", "dogs bark"]);
        assert_eq!(bleu(&c, &c).unwrap(), 100.0);
        assert_eq!(bleu(&corpus(&["x y z"]), &corpus(&["a b c"])).unwrap(), 0.0);
        assert_eq!(bleu(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn bleu_hand_trace() {
        // p1 = 1/3 (clipped), p2 = (0+1)/(2+1), p3 = (0+1)/(1+1),
        // p4 = (0+1)/(0+1); h = 3 ≥ r = 2, so no brevity penalty.
        let got = bleu(&corpus(&["the the the"]), &corpus(&["the cat"])).unwrap();
        let want = 100.0 * (1.0f64 / 3.0 * 1.0 / 3.0 * 1.0 / 2.0).powf(0.25);
        assert!(close(got, want, 1e-12), "{} vs {}", got, want);
        assert!(close(got, 48.55, 0.01));
    }

    #[test]
    fn bleu_brevity_penalty() {
        // Exact prefix of a longer reference: all precisions 1.
        let got = bleu(&corpus(&["a b c"]), &corpus(&["a b c d e f"])).unwrap();
        assert!(close(got, 100.0 * (1.0f64 - 2.0).exp(), 1e-9));
    }

    #[test]
    fn bleu_length_mismatch() {
        assert_eq!(
            bleu(&corpus(&["a"]), &[]).unwrap_err(),
            EvalError::LengthMismatch { hyps: 1, refs: 0 }
        );
    }

    #[test]
    fn nist_hand_trace() {
        // Each unigram carries log2(3/1); every longer n-gram has the same
        // count as its prefix, so carries zero.
        let c = corpus(&["a b c"]);
        assert!(close(nist(&c, &c).unwrap(), 3f64.log2(), 1e-12));
        assert_eq!(nist(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn nist_repeated_words() {
        // Reference "a a b": info(a) = log2(3/2), info(b) = log2 3,
        // info(a a) = log2(2/1), info(a b) = log2(2/1), info(a a b) = 0.
        let c = corpus(&["a a b"]);
        let uni = (2.0 * (1.5f64).log2() + 3f64.log2()) / 3.0;
        let bi = (1.0 + 1.0) / 2.0;
        assert!(close(nist(&c, &c).unwrap(), uni + bi, 1e-12));
    }

    #[test]
    fn nist_doubling_invariance() {
        let hyps = corpus(&["the boy reads", "a dog barks loudly"]);
        let refs = corpus(&["the boy reads books", "a dog barks"]);
        let h2: Vec<_> = hyps.iter().chain(&hyps).cloned().collect();
        let r2: Vec<_> = refs.iter().chain(&refs).cloned().collect();
        assert!(close(nist(&hyps, &refs).unwrap(), nist(&h2, &r2).unwrap(), 1e-12));
    }

    #[test]
    fn nist_brevity_half_at_two_thirds() {
        assert!(close(nist_brevity(2, 3), 0.5, 1e-12));
        assert_eq!(nist_brevity(5, 3), 1.0);
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist("The boy.", "the boy"), 100.0);
        assert_eq!(dist("abc", "xyz"), 0.0);
        assert!(close(dist("abc", "abd"), 66.67, 0.01));
        assert_eq!(dist("", "!"), 100.0);
        assert_eq!(normalize_for_dist("  Hello,   World! "), "hello world");
    }

    #[test]
    fn report_formats() {
        let r = evaluate(&["The boy reads ."], &["The boy reads ."]).unwrap();
        assert_eq!((r.bleu, r.dist), (100.0, 100.0));
        assert!(r.to_tsv().starts_with("bleu\t100.0000\nnist\t"));
        assert!(r.to_table().contains("BLEU"));
        assert_eq!(r.per_sentence.len(), 1);
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "the", "dog", "ran"]).prop_map(str::to_string)
    }

    fn sentence() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(word(), 1..8)
    }

    proptest! {
        #[test]
        fn levenshtein_symmetry_and_triangle(a in "[abc ]{0,8}", b in "[abc ]{0,8}", c in "[abc ]{0,8}") {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
            prop_assert_eq!(levenshtein(&a, &a), 0);
        }

        #[test]
        fn metrics_bounded(h in prop::collection::vec(sentence(), 1..5), seed in any::<u64>()) {
            let mut r = h.clone();
            r.rotate_left((seed % h.len() as u64) as usize);
            let b = bleu(&h, &r).unwrap();
            prop_assert!((0.0..=100.0).contains(&b));
            prop_assert!(nist(&h, &r).unwrap() >= 0.0);
            let d = dist(&h[0].join(" "), &r[0].join(" "));
            prop_assert!((0.0..=100.0).contains(&d));
        }

        #[test]
        fn identity_scores_100(c in prop::collection::vec(sentence(), 1..5)) {
            prop_assert_eq!(bleu(&c, &c).unwrap(), 100.0);
            for s in &c {
                prop_assert_eq!(dist(&s.join(" "), &s.join(" ")), 100.0);
            }
        }

        #[test]
        fn bleu_ignores_sentence_order(pairs in prop::collection::vec((sentence(), sentence()), 1..6)) {
            let (h, r): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
            let (hr, rr): (Vec<_>, Vec<_>) = pairs.iter().rev().cloned().unzip();
            prop_assert!(close(bleu(&h, &r).unwrap(), bleu(&hr, &rr).unwrap(), 1e-9));
        }

        #[test]
        fn nist_info_nonnegative(refs in prop::collection::vec(sentence(), 1..5)) {
            let w = NistWeights::from_references(&refs);
            for r in &refs {
                for n in 1..=NIST_ORDER.min(r.len()) {
                    for g in r.windows(n) {
                        prop_assert!(w.info(g).unwrap() >= 0.0);
                    }
                }
            }
        }
    }
}
