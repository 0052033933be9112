//! Conversion of CoNLL-U POS and FEATS annotations into an approximation of
//! the UniMorph tag format (`N;SING`, `V;PST;FIN`, ...).
//!
//! The mapping lives in a small tab-separated table so it can be edited
//! without rebuilding; the English table is bundled as [`ENGLISH_TABLE`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostic;

/// The bundled English mapping table, in the on-disk text format.
pub const ENGLISH_TABLE: &str = include_str!("../data/en_morph.tsv");

/// POS class assigned when the input POS is not in the table.
pub const UNKNOWN_CLASS: &str = "X";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphError {
    #[error("line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("invalid tag {0:?}")]
    InvalidTag(String),
}

/// A UniMorph-style tag: a POS class followed by feature tags.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MorphTag {
    tags: Vec<String>,
}

impl MorphTag {
    /// Builds a tag from its elements. Elements are uppercased; empty
    /// elements or elements containing `;` are rejected.
    pub fn new<I, S>(tags: I) -> Result<Self, MorphError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tags: Vec<String> = tags.into_iter().map(|t| t.as_ref().to_uppercase()).collect();
        if tags.is_empty() || tags.iter().any(|t| t.is_empty() || t.contains(';')) {
            return Err(MorphError::InvalidTag(tags.join(";")));
        }
        Ok(MorphTag { tags })
    }

    pub fn class(&self) -> &str {
        &self.tags[0]
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }
}

impl fmt::Display for MorphTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tags.join(";"))
    }
}

impl FromStr for MorphTag {
    type Err = MorphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MorphTag::new(s.trim().split(';'))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatTarget {
    Tag(String),
    Drop,
}

#[derive(Clone, Debug, Default)]
pub struct MappingTable {
    pos_map: HashMap<String, String>,
    feat_map: HashMap<(String, String), FeatTarget>,
}

impl MappingTable {
    /// Parses the table format: `POS<TAB>upos<TAB>class` and
    /// `FEAT<TAB>Key=Value<TAB>tag` (or `DROP`). Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self, MorphError> {
        let mut table = MappingTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| MorphError::Table {
                line: i + 1,
                message: message.to_string(),
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(err("expected 3 tab-separated columns"));
            }
            let target = cols[2].trim();
            if target.is_empty() || target.contains(';') {
                return Err(err("empty or ';'-containing target"));
            }
            match cols[0] {
                "POS" => {
                    table
                        .pos_map
                        .insert(cols[1].to_string(), target.to_uppercase());
                }
                "FEAT" => {
                    let (k, v) = cols[1]
                        .split_once('=')
                        .ok_or_else(|| err("feature must be Key=Value"))?;
                    let t = if target == "DROP" {
                        FeatTarget::Drop
                    } else {
                        FeatTarget::Tag(target.to_uppercase())
                    };
                    table.feat_map.insert((k.to_string(), v.to_string()), t);
                }
                other => return Err(err(&format!("unknown record type {:?}", other))),
            }
        }
        Ok(table)
    }

    pub fn english() -> Self {
        Self::parse(ENGLISH_TABLE).expect("bundled table is well formed")
    }

    pub fn pos(&self, upos: &str) -> Option<&str> {
        self.pos_map.get(upos).map(String::as_str)
    }

    pub fn feat(&self, key: &str, value: &str) -> Option<&FeatTarget> {
        self.feat_map.get(&(key.to_string(), value.to_string()))
    }

    /// Every tag string the table can produce, sorted.
    pub fn all_tags(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.pos_map.values().cloned().collect();
        for t in self.feat_map.values() {
            if let FeatTarget::Tag(s) = t {
                out.insert(s.clone());
            }
        }
        out
    }
}

/// Output of [`convert`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conversion {
    pub tag: MorphTag,
    /// Number of `(key, value)` pairs that were not in the table.
    pub unknown_features: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Maps a POS and feature list to a [`MorphTag`].
///
/// Features are processed in alphabetical key order regardless of input
/// order. Unknown features are omitted and counted; an unknown POS becomes
/// class `X`.
pub fn convert(upos: &str, feats: &[(String, String)], table: &MappingTable) -> Conversion {
    let mut diagnostics = Vec::new();
    let class = match table.pos(upos) {
        Some(c) => c.to_string(),
        None => {
            diagnostics.push(Diagnostic::new(format!("unknown POS {:?}", upos)));
            UNKNOWN_CLASS.to_string()
        }
    };
    let mut sorted: Vec<&(String, String)> = feats.iter().collect();
    sorted.sort();
    let mut tags = vec![class];
    let mut unknown_features = 0;
    for (k, v) in sorted {
        match table.feat(k, v) {
            Some(FeatTarget::Tag(t)) => tags.push(t.clone()),
            Some(FeatTarget::Drop) => {}
            None => {
                unknown_features += 1;
                diagnostics.push(Diagnostic::new(format!("unknown feature {}={}", k, v)));
            }
        }
    }
    Conversion {
        tag: MorphTag { tags },
        unknown_features,
        diagnostics,
    }
}

/// Binary membership vector of `tag` over `inventory`.
///
/// Elements of the tag missing from the inventory are ignored; one
/// diagnostic is returned per such element.
pub fn feature_vector(tag: &MorphTag, inventory: &[String]) -> (Vec<f64>, Vec<Diagnostic>) {
    let mut v = vec![0.0; inventory.len()];
    let mut diags = Vec::new();
    for t in tag.tags() {
        match inventory.iter().position(|x| x == t) {
            Some(i) => v[i] = 1.0,
            None => diags.push(Diagnostic::new(format!("tag {:?} not in inventory", t))),
        }
    }
    (v, diags)
}

/// Sorted union of all tag elements, for use as a feature inventory.
pub fn build_inventory<'a, I>(tags: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a MorphTag>,
{
    let set: BTreeSet<String> = tags
        .into_iter()
        .flat_map(|t| t.tags().iter().cloned())
        .collect();
    set.into_iter().collect()
}
