//! Backoff n-gram language model.
//!
//! Models are trained with interpolated Witten-Bell smoothing and stored in
//! the standard ARPA backoff representation: every seen n-gram carries its
//! (interpolated) log10 probability, and every seen history carries a log10
//! backoff weight. For a history `h` with `c(h)` tokens and `T(h)` distinct
//! followers,
//!
//! ```text
//! P(w | h) = (c(h, w) + T(h) · P(w | h')) / (c(h) + T(h))
//! bow(h)   = T(h) / (c(h) + T(h))
//! ```
//!
//! where `h'` drops the oldest word. The unigram level interpolates with the
//! uniform distribution over the vocabulary (minus `<s>`), so `<unk>` and
//! other unseen words keep some mass. All words are lowercased.

mod arpa;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

pub use arpa::{emit_arpa, parse_arpa};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// log10 probability written for events the model gives zero mass (`<s>`).
pub const LOG_ZERO: f64 = -99.0;

#[derive(Debug, Error, PartialEq)]
pub enum LmError {
    #[error("no data")]
    NoData,
    #[error("order must be at least 1")]
    BadOrder,
    #[error("line {line}: {message}")]
    Arpa { line: usize, message: String },
}

/// Sorted list of unique words, including `<s>`, `</s>` and `<unk>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set: BTreeSet<String> = words.into_iter().map(|w| w.as_ref().to_string()).collect();
        for r in [BOS, EOS, UNK] {
            set.insert(r.to_string());
        }
        let words: Vec<String> = set.into_iter().collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Vocabulary { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// One word per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for w in &self.words {
            s.push_str(w);
            s.push('\n');
        }
        s
    }

    /// Reads one word per line; blank lines are ignored.
    pub fn from_text(text: &str) -> Self {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }
}

/// Collects the lowercased whitespace tokens of `corpus`.
pub fn build_vocab<S: AsRef<str>>(corpus: &[S]) -> Vocabulary {
    Vocabulary::new(corpus.iter().flat_map(|s| crate::text::lower_tokens(s.as_ref())))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NGramEntry {
    pub logprob: f64,
    pub backoff: Option<f64>,
}

/// Result of scoring a word sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct LmScore {
    /// Sum of log10 probabilities.
    pub total: f64,
    pub oov_count: usize,
    /// `ngrams_used[n - 1]` counts positions answered by an explicit n-gram.
    pub ngrams_used: Vec<usize>,
}

pub type NGramTable = HashMap<Box<[u32]>, NGramEntry>;

#[derive(Clone, Debug)]
pub struct NGramModel {
    order: usize,
    vocab: Vocabulary,
    /// `tables[n - 1]` holds the n-grams.
    tables: Vec<NGramTable>,
    bos: u32,
    eos: u32,
    /// `None` when the model has no `<unk>` unigram (possible for ARPA input).
    unk: Option<u32>,
    /// Every stored log probability and backoff weight is ≤ 0, so each
    /// position contributes ≤ 0 and prefix scores only decrease.
    nonpositive: bool,
}

/// Marker id for a word the model cannot represent at all.
const NO_ID: u32 = u32::MAX;

impl NGramModel {
    pub(crate) fn from_parts(order: usize, vocab: Vocabulary, tables: Vec<NGramTable>) -> Self {
        let bos = vocab.id(BOS).expect("vocabulary has <s>");
        let eos = vocab.id(EOS).expect("vocabulary has </s>");
        let unk = vocab.id(UNK).filter(|&u| tables[0].contains_key(&[u][..]));
        let nonpositive = tables
            .iter()
            .flat_map(|t| t.values())
            .all(|e| e.logprob <= 0.0 && e.backoff.unwrap_or(0.0) <= 0.0);
        NGramModel {
            order,
            vocab,
            tables,
            bos,
            eos,
            unk,
            nonpositive,
        }
    }

    /// True when sequence scores can only decrease as words are appended.
    pub fn scores_nonincreasing(&self) -> bool {
        self.nonpositive
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn table(&self, n: usize) -> &NGramTable {
        &self.tables[n - 1]
    }

    pub fn bos_id(&self) -> u32 {
        self.bos
    }

    pub fn eos_id(&self) -> u32 {
        self.eos
    }

    /// Looks up an n-gram by its words.
    pub fn entry(&self, words: &[&str]) -> Option<NGramEntry> {
        if words.is_empty() || words.len() > self.order {
            return None;
        }
        let ids: Option<Vec<u32>> = words.iter().map(|w| self.vocab.id(w)).collect();
        self.tables[words.len() - 1].get(ids?.as_slice()).copied()
    }

    /// Maps a word to its id: reserved tokens verbatim, everything else
    /// lowercased, unknown words to `<unk>`. The flag reports an OOV.
    pub fn word_id(&self, word: &str) -> (u32, bool) {
        if word == BOS || word == EOS || word == UNK {
            return (self.vocab.id(word).unwrap_or(NO_ID), false);
        }
        let lw = word.to_lowercase();
        match self.vocab.id(&lw) {
            Some(id) if self.tables[0].contains_key(&[id][..]) => (id, false),
            _ => (self.unk.unwrap_or(NO_ID), true),
        }
    }

    pub fn ids<S: AsRef<str>>(&self, words: &[S]) -> Vec<u32> {
        words.iter().map(|w| self.word_id(w.as_ref()).0).collect()
    }

    /// log10 P(ids[i] | preceding ids within the model order), with the
    /// order of the n-gram that answered. `None` if the word has no
    /// probability at all (an OOV in a model without `<unk>`).
    pub fn logprob_at(&self, ids: &[u32], i: usize) -> Option<(f64, usize)> {
        let start = i.saturating_sub(self.order - 1);
        let mut bow = 0.0;
        for s in start..=i {
            let key = &ids[s..=i];
            if let Some(e) = self.tables[key.len() - 1].get(key) {
                return Some((bow + e.logprob, key.len()));
            }
            if s < i {
                if let Some(c) = self.tables[i - s - 1].get(&ids[s..i]) {
                    bow += c.backoff.unwrap_or(0.0);
                }
            }
        }
        None
    }

    /// Contribution of position `i` to a sequence score: zero for `<s>`
    /// (a context-only token) and for unscorable OOVs.
    #[inline]
    pub fn position_score(&self, ids: &[u32], i: usize) -> f64 {
        if ids[i] == self.bos {
            return 0.0;
        }
        self.logprob_at(ids, i).map_or(0.0, |(lp, _)| lp)
    }

    /// Sum of [`NGramModel::position_score`] over every position.
    pub fn score_ids(&self, ids: &[u32]) -> f64 {
        let mut total = 0.0;
        for i in 0..ids.len() {
            total += self.position_score(ids, i);
        }
        total
    }

    /// Scores a word sequence. No sentence markers are added; include `<s>`
    /// and `</s>` explicitly to score a whole sentence.
    pub fn score<S: AsRef<str>>(&self, words: &[S]) -> LmScore {
        let mut oov_count = 0;
        let ids: Vec<u32> = words
            .iter()
            .map(|w| {
                let (id, oov) = self.word_id(w.as_ref());
                oov_count += oov as usize;
                id
            })
            .collect();
        let mut total = 0.0;
        let mut ngrams_used = vec![0; self.order];
        for i in 0..ids.len() {
            if ids[i] == self.bos {
                continue;
            }
            if let Some((lp, n)) = self.logprob_at(&ids, i) {
                total += lp;
                ngrams_used[n - 1] += 1;
            }
        }
        LmScore {
            total,
            oov_count,
            ngrams_used,
        }
    }

    /// Scores `<s> words </s>`.
    pub fn score_sentence<S: AsRef<str>>(&self, words: &[S]) -> LmScore {
        let mut v: Vec<&str> = Vec::with_capacity(words.len() + 2);
        v.push(BOS);
        v.extend(words.iter().map(|w| w.as_ref()));
        v.push(EOS);
        self.score(&v)
    }

    /// P(word | history) as a plain probability.
    pub fn prob<S: AsRef<str>>(&self, history: &[S], word: &str) -> f64 {
        let mut ids = self.ids(history);
        ids.push(self.word_id(word).0);
        if *ids.last().unwrap() == self.bos {
            return 0.0;
        }
        let i = ids.len() - 1;
        self.logprob_at(&ids, i)
            .map_or(0.0, |(lp, _)| 10f64.powf(lp))
    }
}

/// Trains an interpolated Witten-Bell model of the given order.
///
/// Sentences are lowercased, whitespace-tokenized and wrapped in
/// `<s> ... </s>`; words missing from `vocab` are counted as `<unk>`.
/// Blank sentences are ignored.
pub fn train_lm<S: AsRef<str>>(corpus: &[S], order: usize, vocab: &Vocabulary) -> Result<NGramModel, LmError> {
    if order == 0 {
        return Err(LmError::BadOrder);
    }
    let bos = vocab.id(BOS).unwrap();
    let eos = vocab.id(EOS).unwrap();
    let unk = vocab.id(UNK).unwrap();

    // counts[n - 1]: n-gram → count of the n-gram ending at a predicted
    // position.
    let mut counts: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); order];
    let mut sentences = 0;
    for s in corpus {
        let toks = crate::text::lower_tokens(s.as_ref());
        if toks.is_empty() {
            continue;
        }
        sentences += 1;
        let mut ids = Vec::with_capacity(toks.len() + 2);
        ids.push(bos);
        ids.extend(toks.iter().map(|t| vocab.id(t).unwrap_or(unk)));
        ids.push(eos);
        for i in 1..ids.len() {
            for n in 1..=order.min(i + 1) {
                *counts[n - 1].entry(ids[i + 1 - n..=i].to_vec()).or_insert(0) += 1;
            }
        }
    }
    if sentences == 0 {
        return Err(LmError::NoData);
    }

    let mut tables: Vec<NGramTable> = Vec::with_capacity(order);

    // Unigrams: interpolate with the uniform distribution over V \ {<s>}.
    let total: u64 = counts[0].values().sum();
    let types = counts[0].len() as f64;
    let support = (vocab.len() - 1) as f64;
    let mut uni = NGramTable::new();
    for (i, _) in vocab.words().iter().enumerate() {
        let id = i as u32;
        let logprob = if id == bos {
            LOG_ZERO
        } else {
            let c = counts[0].get(&vec![id]).copied().unwrap_or(0) as f64;
            ((c + types / support) / (total as f64 + types)).log10()
        };
        uni.insert(
            vec![id].into_boxed_slice(),
            NGramEntry {
                logprob,
                backoff: None,
            },
        );
    }
    tables.push(uni);

    for n in 2..=order {
        // History statistics from the n-gram counts.
        let mut hist: HashMap<&[u32], (u64, u64)> = HashMap::new();
        for (g, &c) in &counts[n - 1] {
            let e = hist.entry(&g[..n - 1]).or_insert((0, 0));
            e.0 += c;
            e.1 += 1;
        }
        let mut table = NGramTable::new();
        {
            let partial = NGramModel::from_parts(n - 1, vocab.clone(), tables.clone());
            for (g, &c) in &counts[n - 1] {
                let (ch, th) = hist[&g[..n - 1]];
                let lower = partial
                    .logprob_at(&g[1..], n - 2)
                    .map_or(0.0, |(lp, _)| 10f64.powf(lp));
                let p = (c as f64 + th as f64 * lower) / (ch as f64 + th as f64);
                table.insert(
                    g.clone().into_boxed_slice(),
                    NGramEntry {
                        logprob: p.log10(),
                        backoff: None,
                    },
                );
            }
        }
        let lower = &mut tables[n - 2];
        for (h, (ch, th)) in hist {
            let bow = (th as f64 / (ch as f64 + th as f64)).log10();
            if let Some(e) = lower.get_mut(h) {
                e.backoff = Some(bow);
            }
        }
        tables.push(table);
    }
    Ok(NGramModel::from_parts(order, vocab.clone(), tables))
}
