//! Rule-generated English morphology data.
//!
//! Pseudo-English lemmas are generated from syllable templates and inflected
//! with regular spelling rules:
//!
//! * plural (`N;PL`): `+es` after s/x/z/ch/sh, consonant-`y` → `-ies`,
//!   otherwise `+s`;
//! * present participle (`V;PRS;PTCP`): final silent `e` is dropped before
//!   `+ing`;
//! * past (`V;PST;FIN`): `+d` after `e`, consonant-`y` → `-ied`, otherwise
//!   `+ed`.
//!
//! Because the rules generate the data, they are also its oracle.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrainExample;
use crate::morphmap::MorphTag;

pub const PLURAL: &str = "N;PL";
pub const GERUND: &str = "V;PRS;PTCP";
pub const PAST: &str = "V;PST;FIN";

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "bl", "br",
    "cl", "cr", "dr", "fl", "fr", "gl", "gr", "pl", "pr", "sl", "sp", "st", "tr", "sh", "th",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "oo", "ou"];
const SIBILANT_CODAS: &[&str] = &["ss", "x", "ch", "sh", "zz"];
const Y_CONSONANTS: &[&str] = &["l", "r", "n", "t", "d", "p", "m"];
const E_CONSONANTS: &[&str] = &["k", "t", "v", "z", "m", "n", "l", "r", "p", "d", "s", "c"];
const PLAIN_CODAS: &[&str] = &[
    "k", "t", "m", "n", "l", "r", "p", "d", "g", "ck", "nd", "st", "lt", "mp", "rk", "nt", "ft",
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn consonant_y(w: &str) -> bool {
    let cs: Vec<char> = w.chars().collect();
    cs.len() >= 2 && cs[cs.len() - 1] == 'y' && !is_vowel(cs[cs.len() - 2])
}

pub fn plural(w: &str) -> String {
    if ["s", "x", "z", "ch", "sh"].iter().any(|e| w.ends_with(e)) {
        format!("{}es", w)
    } else if consonant_y(w) {
        format!("{}ies", &w[..w.len() - 1])
    } else {
        format!("{}s", w)
    }
}

pub fn gerund(w: &str) -> String {
    if w.ends_with('e') && !w.ends_with("ee") && w.len() > 2 {
        format!("{}ing", &w[..w.len() - 1])
    } else {
        format!("{}ing", w)
    }
}

pub fn past(w: &str) -> String {
    if w.ends_with('e') {
        format!("{}d", w)
    } else if consonant_y(w) {
        format!("{}ied", &w[..w.len() - 1])
    } else {
        format!("{}ed", w)
    }
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

fn lemma<R: Rng>(rng: &mut R) -> String {
    let syllables = rng.gen_range(1..=2);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(pick(rng, ONSETS));
        w.push_str(pick(rng, VOWELS));
    }
    match rng.gen_range(0..100) {
        0..=19 => w.push_str(pick(rng, SIBILANT_CODAS)),
        20..=39 => {
            w.push_str(pick(rng, Y_CONSONANTS));
            w.push('y');
        }
        40..=64 => {
            w.push_str(pick(rng, E_CONSONANTS));
            w.push('e');
        }
        _ => w.push_str(pick(rng, PLAIN_CODAS)),
    }
    w
}

/// `n` distinct random lemmas.
pub fn lemmas(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = lemma(&mut rng);
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// The three inflections of one lemma.
pub fn inflect(lemma: &str) -> Vec<TrainExample> {
    let tag = |s: &str| s.parse::<MorphTag>().unwrap();
    vec![
        TrainExample::new(lemma, tag(PLURAL), &plural(lemma)),
        TrainExample::new(lemma, tag(GERUND), &gerund(lemma)),
        TrainExample::new(lemma, tag(PAST), &past(lemma)),
    ]
}

/// A train/held-out split of rule-generated triples. Held-out lemmas never
/// appear in the training part.
#[derive(Clone, Debug)]
pub struct SynthSplit {
    pub train: Vec<TrainExample>,
    pub held_out: Vec<TrainExample>,
}

/// Generates `3 * n_lemmas` triples and holds out every triple of
/// `held_out_fraction` of the lemmas.
pub fn english_morphology(n_lemmas: usize, held_out_fraction: f64, seed: u64) -> SynthSplit {
    let words = lemmas(n_lemmas, seed);
    let n_held = ((n_lemmas as f64) * held_out_fraction).round() as usize;
    let (held, train) = words.split_at(n_held.min(words.len()));
    SynthSplit {
        train: train.iter().flat_map(|w| inflect(w)).collect(),
        held_out: held.iter().flat_map(|w| inflect(w)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spelling_rules() {
        assert_eq!(plural("box"), "boxes");
        assert_eq!(plural("church"), "churches");
        assert_eq!(plural("city"), "cities");
        assert_eq!(plural("day"), "days");
        assert_eq!(plural("book"), "books");
        assert_eq!(gerund("make"), "making");
        assert_eq!(gerund("see"), "seeing");
        assert_eq!(gerund("play"), "playing");
        assert_eq!(past("like"), "liked");
        assert_eq!(past("carry"), "carried");
        assert_eq!(past("walk"), "walked");
    }

    #[test]
    fn split_is_disjoint_and_sized() {
        let s = english_morphology(100, 0.1, 7);
        assert_eq!(s.train.len() + s.held_out.len(), 300);
        assert_eq!(s.held_out.len(), 30);
        let train_lemmas: BTreeSet<&str> = s.train.iter().map(|e| e.lemma.as_str()).collect();
        assert!(s.held_out.iter().all(|e| !train_lemmas.contains(e.lemma.as_str())));
    }

    #[test]
    fn deterministic() {
        assert_eq!(lemmas(50, 3), lemmas(50, 3));
        assert_ne!(lemmas(50, 3), lemmas(50, 4));
    }
}
