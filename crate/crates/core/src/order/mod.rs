//! Word-order recovery by language-model search.
//!
//! A bag of words is ordered by one of three strategies, chosen by size:
//!
//! * **exhaustive** — every permutation is scored as a full sentence;
//! * **Method 2** — the length is split into chunk schemes of trigram,
//!   bigram and unigram blocks; each block is filled greedily with the best
//!   scoring tuple of remaining words, then every arrangement of the blocks
//!   is scored as a full sentence;
//! * **Method 1** — the best 4-word sentence prefix is chosen, then the
//!   best next word is appended until the list of remaining words (LRW) is
//!   empty.
//!
//! Ties are always broken towards the lexicographically smallest word
//! sequence, so results are deterministic.

use std::cmp::Ordering;

use thiserror::Error;

use crate::lm::NGramModel;
use crate::Diagnostic;


#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("empty after preprocessing")]
    Empty,
    #[error("bag of {len} words exceeds the exhaustive limit of {limit}; use method1 or method2")]
    TooLarge { len: usize, limit: usize },
    #[error("method 1 needs at least {min} words, got {len}")]
    TooSmall { len: usize, min: usize },
    #[error("every chunk scheme for {len} words exceeds the arrangement cap")]
    NoScheme { len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exhaustive,
    Method1,
    Method2,
}

/// Settings for [`realize_order`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderConfig {
    /// Longest bag handled by Method 2; longer bags use Method 1.
    pub threshold: usize,
    /// Longest bag ordered by full permutation search.
    pub exhaustive_limit: usize,
    /// Schemes with more block arrangements than this are skipped.
    pub arrangement_cap: usize,
    pub capitalize: bool,
    pub append_full_stop: bool,
}

impl Default for OrderConfig {
    fn default() -> Self {
        OrderConfig {
            threshold: 23,
            exhaustive_limit: 4,
            arrangement_cap: 362_880,
            capitalize: true,
            append_full_stop: true,
        }
    }
}

/// A lowercased, punctuation-free multiset of words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordBag {
    words: Vec<String>,
}

impl WordBag {
    /// Wraps already-preprocessed words.
    pub fn new<S: AsRef<str>>(words: &[S]) -> Self {
        WordBag {
            words: words.iter().map(|w| w.as_ref().to_string()).collect(),
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Drops punctuation-only tokens and lowercases the rest.
pub fn preprocess<S: AsRef<str>>(tokens: &[S]) -> Result<WordBag, OrderError> {
    let words: Vec<String> = tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !t.trim().is_empty() && !crate::text::is_punct_token(t))
        .map(str::to_lowercase)
        .collect();
    if words.is_empty() {
        return Err(OrderError::Empty);
    }
    Ok(WordBag { words })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderingResult {
    pub sequence: Vec<String>,
    /// Score of `<s> sequence </s>`.
    pub lm_score: crate::lm::LmScore,
    pub method: Method,
    /// Every candidate sequence scored, across all stages.
    pub candidates_evaluated: u64,
    /// Method 1 only: 4-word seeds scored.
    pub seed_candidates: u64,
    /// Method 1 only: greedy extension steps.
    pub extension_iterations: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// A chunk scheme: block sizes in {1, 2, 3}, largest first.
pub type ChunkScheme = Vec<usize>;

/// All partitions of `n` into parts of size at most 3 using at most
/// `ceil(n / 3) + 1` parts, largest part first, listed in descending
/// lexicographic order.
pub fn chunk_schemes(n: usize) -> Vec<ChunkScheme> {
    fn go(rest: usize, max_part: usize, max_parts: usize, cur: &mut Vec<usize>, out: &mut Vec<ChunkScheme>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == max_parts {
            return;
        }
        for part in (1..=max_part.min(rest)).rev() {
            cur.push(part);
            go(rest - part, part, max_parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, 3, n.div_ceil(3) + 1, &mut Vec::new(), &mut out);
    }
    out
}

/// Bag words paired with model ids, sorted by word.
struct Words<'a> {
    text: Vec<&'a str>,
    ids: Vec<u32>,
}

impl<'a> Words<'a> {
    fn new(bag: &'a WordBag, model: &NGramModel) -> Self {
        let mut text: Vec<&str> = bag.words.iter().map(String::as_str).collect();
        text.sort_unstable();
        let ids = text.iter().map(|w| model.word_id(w).0).collect();
        Words { text, ids }
    }
}

/// Best candidate so far: `score` then lexicographically smallest words.
struct Best<T> {
    score: f64,
    words: Vec<String>,
    item: Option<T>,
}

impl<T> Best<T> {
    fn new() -> Self {
        Best {
            score: f64::NEG_INFINITY,
            words: Vec::new(),
            item: None,
        }
    }

    /// Offers a candidate; `words` is only materialized when needed.
    fn offer<'w>(&mut self, score: f64, words: impl Fn() -> Vec<&'w str>, item: impl FnOnce() -> T) {
        let better = match score.partial_cmp(&self.score) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => {
                self.item.is_none() || words().iter().copied().lt(self.words.iter().map(String::as_str))
            }
            _ => self.item.is_none(),
        };
        if better {
            self.score = score;
            self.words = words().into_iter().map(str::to_string).collect();
            self.item = Some(item());
        }
    }
}

fn finish(
    model: &NGramModel,
    sequence: Vec<String>,
    method: Method,
    candidates_evaluated: u64,
) -> OrderingResult {
    let lm_score = model.score_sentence(&sequence);
    OrderingResult {
        sequence,
        lm_score,
        method,
        candidates_evaluated,
        seed_candidates: 0,
        extension_iterations: 0,
        diagnostics: Vec::new(),
    }
}

/// Scores every permutation of the bag as a full sentence.
pub fn exhaustive(bag: &WordBag, model: &NGramModel, limit: usize) -> Result<OrderingResult, OrderError> {
    if bag.is_empty() {
        return Err(OrderError::Empty);
    }
    if bag.len() > limit {
        return Err(OrderError::TooLarge {
            len: bag.len(),
            limit,
        });
    }
    let w = Words::new(bag, model);
    let n = w.ids.len();
    let mut buf = Vec::with_capacity(n + 2);
    buf.push(model.bos_id());
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut best: Best<Vec<usize>> = Best::new();
    let mut count = 0u64;

    #[allow(clippy::too_many_arguments)]
    fn go(
        model: &NGramModel,
        w: &Words,
        buf: &mut Vec<u32>,
        perm: &mut Vec<usize>,
        used: &mut [bool],
        sum: f64,
        best: &mut Best<Vec<usize>>,
        count: &mut u64,
    ) {
        if perm.len() == used.len() {
            buf.push(model.eos_id());
            let total = sum + model.position_score(buf, buf.len() - 1);
            buf.pop();
            *count += 1;
            best.offer(total, || perm.iter().map(|&i| w.text[i]).collect(), || perm.clone());
            return;
        }
        for i in 0..used.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            perm.push(i);
            buf.push(w.ids[i]);
            let s = sum + model.position_score(buf, buf.len() - 1);
            go(model, w, buf, perm, used, s, best, count);
            buf.pop();
            perm.pop();
            used[i] = false;
        }
    }
    go(model, &w, &mut buf, &mut perm, &mut used, 0.0, &mut best, &mut count);
    let seq = best.item.unwrap().iter().map(|&i| w.text[i].to_string()).collect();
    Ok(finish(model, seq, Method::Exhaustive, count))
}

/// Best 4-word sentence prefix, then greedy extension from the LRW.
pub fn method1(bag: &WordBag, model: &NGramModel) -> Result<OrderingResult, OrderError> {
    const SEED: usize = 4;
    if bag.len() < SEED {
        return Err(OrderError::TooSmall {
            len: bag.len(),
            min: SEED,
        });
    }
    let w = Words::new(bag, model);
    let n = w.ids.len();
    let bos = model.bos_id();

    // Seed: ordered 4-tuples of distinct positions, scored as <s> + 4 words.
    let mut best: Best<[usize; SEED]> = Best::new();
    let mut seeds = 0u64;
    let mut buf = [bos, 0, 0, 0, 0];
    let score_at = |buf: &[u32], i: usize| model.position_score(buf, i);
    for a in 0..n {
        buf[1] = w.ids[a];
        let sa = score_at(&buf[..2], 1);
        for b in (0..n).filter(|&b| b != a) {
            buf[2] = w.ids[b];
            let sb = sa + score_at(&buf[..3], 2);
            for c in (0..n).filter(|&c| c != a && c != b) {
                buf[3] = w.ids[c];
                let sc = sb + score_at(&buf[..4], 3);
                for d in (0..n).filter(|&d| d != a && d != b && d != c) {
                    buf[4] = w.ids[d];
                    let total = sc + score_at(&buf, 4);
                    seeds += 1;
                    best.offer(
                        total,
                        || vec![w.text[a], w.text[b], w.text[c], w.text[d]],
                        || [a, b, c, d],
                    );
                }
            }
        }
    }
    let seed = best.item.unwrap();
    let mut seq_ids: Vec<u32> = std::iter::once(bos).chain(seed.iter().map(|&i| w.ids[i])).collect();
    let mut seq_text: Vec<&str> = seed.iter().map(|&i| w.text[i]).collect();
    let mut prefix = best.score;
    let mut lrw: Vec<usize> = (0..n).filter(|i| !seed.contains(i)).collect();

    let mut iterations = 0;
    let mut extensions = 0u64;
    while !lrw.is_empty() {
        let mut step: Best<usize> = Best::new();
        for (k, &i) in lrw.iter().enumerate() {
            seq_ids.push(w.ids[i]);
            let total = prefix + model.position_score(&seq_ids, seq_ids.len() - 1);
            seq_ids.pop();
            extensions += 1;
            step.offer(
                total,
                || seq_text.iter().copied().chain(std::iter::once(w.text[i])).collect(),
                || k,
            );
        }
        let k = step.item.unwrap();
        let i = lrw.remove(k);
        seq_ids.push(w.ids[i]);
        seq_text.push(w.text[i]);
        prefix = step.score;
        iterations += 1;
    }

    let seq = seq_text.into_iter().map(str::to_string).collect();
    let mut out = finish(model, seq, Method::Method1, seeds + extensions);
    out.seed_candidates = seeds;
    out.extension_iterations = iterations;
    Ok(out)
}

/// Greedily fills the blocks of `scheme`: for each size in turn, the ordered
/// tuple of remaining words with the best fragment score (no sentence
/// markers) is taken. Returns the blocks as positions into `w`.
fn fill_chunks(w: &Words, model: &NGramModel, scheme: &[usize], count: &mut u64) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..w.ids.len()).collect();
    let mut chunks = Vec::with_capacity(scheme.len());
    for &size in scheme {
        let mut best: Best<Vec<usize>> = Best::new();
        let mut tuple = Vec::with_capacity(size);
        let mut ids = Vec::with_capacity(size);

        #[allow(clippy::too_many_arguments)]
        fn go(
            model: &NGramModel,
            w: &Words,
            remaining: &[usize],
            size: usize,
            tuple: &mut Vec<usize>,
            ids: &mut Vec<u32>,
            sum: f64,
            best: &mut Best<Vec<usize>>,
            count: &mut u64,
        ) {
            if tuple.len() == size {
                *count += 1;
                best.offer(sum, || tuple.iter().map(|&i| w.text[i]).collect(), || tuple.clone());
                return;
            }
            for &i in remaining {
                if tuple.contains(&i) {
                    continue;
                }
                tuple.push(i);
                ids.push(w.ids[i]);
                let s = sum + model.position_score(ids, ids.len() - 1);
                go(model, w, remaining, size, tuple, ids, s, best, count);
                ids.pop();
                tuple.pop();
            }
        }
        go(model, w, &remaining, size, &mut tuple, &mut ids, 0.0, &mut best, count);
        let chosen = best.item.unwrap();
        remaining.retain(|i| !chosen.contains(i));
        chunks.push(chosen);
    }
    chunks
}

fn factorial(k: usize) -> Option<usize> {
    (1..=k).try_fold(1usize, |acc, x| acc.checked_mul(x))
}

/// Chunk-scheme search: greedy block filling, then every block arrangement
/// scored as a full sentence.
pub fn method2(bag: &WordBag, model: &NGramModel, arrangement_cap: usize) -> Result<OrderingResult, OrderError> {
    if bag.is_empty() {
        return Err(OrderError::Empty);
    }
    let w = Words::new(bag, model);
    let n = w.ids.len();
    let prune = model.scores_nonincreasing();
    let mut diagnostics = Vec::new();
    let mut best: Best<Vec<usize>> = Best::new();
    let mut count = 0u64;

    for scheme in chunk_schemes(n) {
        let k = scheme.len();
        let arrangements = factorial(k).filter(|&f| f <= arrangement_cap);
        let Some(arrangements) = arrangements else {
            diagnostics.push(Diagnostic::new(format!(
                "chunk scheme {:?} skipped: {}! arrangements exceed the cap of {}",
                scheme, k, arrangement_cap
            )));
            continue;
        };
        let chunks = fill_chunks(&w, model, &scheme, &mut count);

        struct Search<'s, 'w> {
            model: &'s NGramModel,
            w: &'s Words<'w>,
            chunks: &'s [Vec<usize>],
            prune: bool,
            buf: Vec<u32>,
            order: Vec<usize>,
            used: Vec<bool>,
        }
        impl Search<'_, '_> {
            fn flat(&self, order: &[usize]) -> Vec<usize> {
                order.iter().flat_map(|&c| self.chunks[c].iter().copied()).collect()
            }
            fn go(&mut self, sum: f64, best: &mut Best<Vec<usize>>) {
                if self.prune && best.item.is_some() && sum < best.score {
                    return;
                }
                if self.order.len() == self.chunks.len() {
                    self.buf.push(self.model.eos_id());
                    let total = sum + self.model.position_score(&self.buf, self.buf.len() - 1);
                    self.buf.pop();
                    let flat = self.flat(&self.order);
                    let w = self.w;
                    best.offer(total, || flat.iter().map(|&i| w.text[i]).collect(), || flat.clone());
                    return;
                }
                for c in 0..self.chunks.len() {
                    if self.used[c] {
                        continue;
                    }
                    self.used[c] = true;
                    self.order.push(c);
                    let mut s = sum;
                    for &i in &self.chunks[c] {
                        self.buf.push(self.w.ids[i]);
                        s += self.model.position_score(&self.buf, self.buf.len() - 1);
                    }
                    self.go(s, best);
                    self.buf.truncate(self.buf.len() - self.chunks[c].len());
                    self.order.pop();
                    self.used[c] = false;
                }
            }
        }
        let mut search = Search {
            model,
            w: &w,
            chunks: &chunks,
            prune,
            buf: vec![model.bos_id()],
            order: Vec::with_capacity(k),
            used: vec![false; k],
        };
        search.go(0.0, &mut best);
        // Pruned arrangements count too: the bound rules them out by score.
        count += arrangements as u64;
    }

    let Some(flat) = best.item else {
        return Err(OrderError::NoScheme { len: n });
    };
    let seq = flat.iter().map(|&i| w.text[i].to_string()).collect();
    let mut out = finish(model, seq, Method::Method2, count);
    out.diagnostics = diagnostics;
    Ok(out)
}

/// Orders an already-preprocessed bag, dispatching on its size.
pub fn order_bag(bag: &WordBag, model: &NGramModel, cfg: &OrderConfig) -> Result<OrderingResult, OrderError> {
    if bag.len() <= cfg.exhaustive_limit {
        exhaustive(bag, model, cfg.exhaustive_limit)
    } else if bag.len() <= cfg.threshold {
        method2(bag, model, cfg.arrangement_cap)
    } else {
        method1(bag, model)
    }
}

/// A realized sentence and the search that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub text: String,
    pub ordering: OrderingResult,
}

/// Preprocesses `tokens`, orders them and formats the sentence.
pub fn realize_order<S: AsRef<str>>(
    tokens: &[S],
    model: &NGramModel,
    cfg: &OrderConfig,
) -> Result<Realization, OrderError> {
    let bag = preprocess(tokens)?;
    let ordering = order_bag(&bag, model, cfg)?;
    let text = format_sentence(&ordering.sequence, cfg);
    Ok(Realization { text, ordering })
}

/// Joins words with spaces, applying the capitalization and full-stop
/// settings.
pub fn format_sentence<S: AsRef<str>>(words: &[S], cfg: &OrderConfig) -> String {
    let mut text = words.iter().map(|w| w.as_ref()).collect::<Vec<_>>().join(" ");
    if cfg.capitalize {
        text = crate::text::capitalize_first(&text);
    }
    if cfg.append_full_stop {
        if text.is_empty() {
            text.push('.');
        } else {
            text.push_str(" .");
        }
    }
    text
}
