use std::collections::{BTreeSet, HashMap};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;
pub const RESERVED: usize = 4;

/// Character inventory. Indices `0..4` are PAD, BOS, EOS and UNK; real
/// characters follow in sorted order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharVocab {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl CharVocab {
    pub fn new<I: IntoIterator<Item = char>>(chars: I) -> Self {
        let set: BTreeSet<char> = chars.into_iter().collect();
        let chars: Vec<char> = set.into_iter().collect();
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + RESERVED))
            .collect();
        CharVocab { chars, index }
    }

    pub fn from_words<'a, I: IntoIterator<Item = &'a str>>(words: I) -> Self {
        Self::new(words.into_iter().flat_map(str::chars))
    }

    /// Total size including reserved symbols.
    pub fn len(&self) -> usize {
        RESERVED + self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    /// Maps a string to indices, using UNK for unknown characters. Returns
    /// the number of UNK substitutions alongside.
    pub fn encode(&self, s: &str) -> (Vec<usize>, usize) {
        let mut unk = 0;
        let ids = s
            .chars()
            .map(|c| {
                self.index_of(c).unwrap_or_else(|| {
                    unk += 1;
                    UNK
                })
            })
            .collect();
        (ids, unk)
    }

    /// The character at `idx`, or `None` for reserved or out-of-range indices.
    pub fn char_at(&self, idx: usize) -> Option<char> {
        idx.checked_sub(RESERVED).and_then(|i| self.chars.get(i).copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_indices_with_reserved_prefix() {
        let v = CharVocab::from_words(["cab", "bad"]);
        assert_eq!(v.len(), RESERVED + 4);
        assert_eq!(v.index_of('a'), Some(4));
        assert_eq!(v.index_of('d'), Some(7));
        assert_eq!(v.char_at(PAD), None);
        assert_eq!(v.char_at(5), Some('b'));
        assert_eq!(v.encode("abz"), (vec![4, 5, UNK], 1));
    }
}
