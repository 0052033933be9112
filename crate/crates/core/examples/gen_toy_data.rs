//! Regenerates the bundled toy data set from a small English grammar.
//!
//! ```text
//! cargo run -p ud-realize --example gen_toy_data -- crates/core/data/toy
//! ```
//!
//! Writes `lm_corpus.txt` (600 sentences), `treebank.conllu` (40 shuffled,
//! lemmatized sentences whose bag sizes include 1, 5, 23 and 24),
//! `references.txt` (`id<TAB>sentence`) and `reinflection.tsv`
//! (`lemma<TAB>TAG<TAB>form` for every form the grammar can produce).

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ud_realize::conllu::{emit_conllu, parse_feats, Corpus, Token, UdSentence};
use ud_realize::morphmap::{convert, MappingTable};
use ud_realize::reinflect::synth::{gerund, past, plural};

const NOUNS: &[&str] = &[
    "boy", "girl", "dog", "cat", "teacher", "student", "book", "letter", "park", "house", "garden",
    "city", "box", "church", "story", "friend", "bird", "tree", "car", "river",
];
const TRANSITIVE: &[&str] = &[
    "like", "watch", "carry", "visit", "open", "clean", "study", "love", "push", "help", "paint",
    "want",
];
const INTRANSITIVE: &[&str] = &["walk", "play", "smile", "arrive", "jump", "dance", "rest", "wait"];
const ADJS: &[&str] = &["big", "small", "old", "young", "happy", "red", "quiet", "tall"];
const PREPS: &[&str] = &["in", "near", "with", "behind"];
const ADVS: &[&str] = &["quickly", "often", "slowly", "today"];

const DEF: &str = "Definite=Def|PronType=Art";
const INDEF: &str = "Definite=Ind|PronType=Art";
const SING: &str = "Number=Sing";
const PLUR: &str = "Number=Plur";
const PRES_3SG: &str = "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin";
const PRES_3PL: &str = "Mood=Ind|Number=Plur|Person=3|Tense=Pres|VerbForm=Fin";
const PRES: &str = "Mood=Ind|Tense=Pres|VerbForm=Fin";
const PAST: &str = "Mood=Ind|Tense=Past|VerbForm=Fin";
const PAST_3SG: &str = "Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin";
const PAST_3PL: &str = "Mood=Ind|Number=Plur|Person=3|Tense=Past|VerbForm=Fin";
const GERUND: &str = "Tense=Pres|VerbForm=Part";
const IMPERATIVE: &str = "Mood=Imp|VerbForm=Fin";
const POSITIVE: &str = "Degree=Pos";

/// A token in surface order; `head` indexes the same vector.
struct Tok {
    lemma: String,
    form: String,
    upos: &'static str,
    feats: &'static str,
    head: Option<usize>,
    deprel: &'static str,
}

struct Builder<'r> {
    toks: Vec<Tok>,
    rng: &'r mut ChaCha8Rng,
}

impl Builder<'_> {
    fn push(&mut self, lemma: &str, form: String, upos: &'static str, feats: &'static str, deprel: &'static str) -> usize {
        self.toks.push(Tok {
            lemma: lemma.to_string(),
            form,
            upos,
            feats,
            head: None,
            deprel,
        });
        self.toks.len() - 1
    }

    fn attach(&mut self, dep: usize, head: usize) {
        self.toks[dep].head = Some(head);
    }

    /// Determiner, adjectives and noun; returns the noun and its number.
    fn noun_phrase(&mut self, deprel: &'static str, max_adjs: usize) -> (usize, bool) {
        let plural_np = self.rng.gen_bool(0.35);
        let mut deps = Vec::new();
        if !plural_np && self.rng.gen_bool(0.4) {
            deps.push(self.push("a", "a".into(), "DET", INDEF, "det"));
        } else if !plural_np || self.rng.gen_bool(0.7) {
            deps.push(self.push("the", "the".into(), "DET", DEF, "det"));
        }
        let n_adj = self.rng.gen_range(0..=max_adjs);
        let mut adjs: Vec<&str> = ADJS.to_vec();
        adjs.shuffle(self.rng);
        for a in adjs.into_iter().take(n_adj) {
            deps.push(self.push(a, a.into(), "ADJ", POSITIVE, "amod"));
        }
        let lemma = *NOUNS.choose(self.rng).unwrap();
        let (form, feats) = if plural_np { (plural(lemma), PLUR) } else { (lemma.to_string(), SING) };
        let noun = self.push(lemma, form, "NOUN", feats, deprel);
        for d in deps {
            self.attach(d, noun);
        }
        (noun, plural_np)
    }

    /// A full clause; returns its main verb.
    fn clause(&mut self, max_pps: usize, max_adjs: usize) -> usize {
        let (subj, plural_subj) = self.noun_phrase("nsubj", max_adjs);
        let transitive = self.rng.gen_bool(0.6);
        let lemma = *if transitive { TRANSITIVE } else { INTRANSITIVE }.choose(self.rng).unwrap();
        let aux = match self.rng.gen_range(0..3) {
            2 => {
                let past_tense = self.rng.gen_bool(0.5);
                let (form, feats) = match (past_tense, plural_subj) {
                    (false, false) => ("is", PRES_3SG),
                    (false, true) => ("are", PRES_3PL),
                    (true, false) => ("was", PAST_3SG),
                    (true, true) => ("were", PAST_3PL),
                };
                Some(self.push("be", form.into(), "AUX", feats, "aux"))
            }
            _ => None,
        };
        let verb = match aux {
            Some(_) => self.push(lemma, gerund(lemma), "VERB", GERUND, "root"),
            None if self.rng.gen_bool(0.5) => self.push(lemma, past(lemma), "VERB", PAST, "root"),
            None if plural_subj => self.push(lemma, lemma.into(), "VERB", PRES, "root"),
            None => self.push(lemma, plural(lemma), "VERB", PRES_3SG, "root"),
        };
        self.attach(subj, verb);
        if let Some(a) = aux {
            self.attach(a, verb);
        }
        if transitive {
            let (obj, _) = self.noun_phrase("obj", max_adjs);
            self.attach(obj, verb);
        }
        for _ in 0..self.rng.gen_range(0..=max_pps) {
            let p = *PREPS.choose(self.rng).unwrap();
            let case = self.push(p, p.into(), "ADP", "", "case");
            let (obl, _) = self.noun_phrase("obl", max_adjs);
            self.attach(case, obl);
            self.attach(obl, verb);
        }
        if self.rng.gen_bool(0.3) {
            let a = *ADVS.choose(self.rng).unwrap();
            let adv = self.push(a, a.into(), "ADV", "", "advmod");
            self.attach(adv, verb);
        }
        verb
    }

    fn sentence(rng: &mut ChaCha8Rng, max_clauses: usize, max_pps: usize, max_adjs: usize) -> Vec<Tok> {
        let mut b = Builder { toks: Vec::new(), rng };
        let root = b.clause(max_pps, max_adjs);
        let extra = b.rng.gen_range(0..max_clauses);
        for _ in 0..extra {
            let comma = if b.rng.gen_bool(0.5) {
                Some(b.push(",", ",".into(), "PUNCT", "", "punct"))
            } else {
                None
            };
            let cc = b.push("and", "and".into(), "CCONJ", "", "cc");
            let verb = b.clause(max_pps, max_adjs);
            b.toks[verb].deprel = "conj";
            b.attach(verb, root);
            b.attach(cc, verb);
            if let Some(c) = comma {
                b.attach(c, verb);
            }
        }
        let stop = b.push(".", ".".into(), "PUNCT", "", "punct");
        b.attach(stop, root);
        b.toks
    }
}

fn imperative() -> Vec<Tok> {
    let verb = Tok {
        lemma: "smile".into(),
        form: "smile".into(),
        upos: "VERB",
        feats: IMPERATIVE,
        head: None,
        deprel: "root",
    };
    let stop = Tok {
        lemma: ".".into(),
        form: ".".into(),
        upos: "PUNCT",
        feats: "",
        head: Some(0),
        deprel: "punct",
    };
    vec![verb, stop]
}

fn words(toks: &[Tok]) -> usize {
    toks.iter().filter(|t| t.upos != "PUNCT").count()
}

fn surface(toks: &[Tok]) -> String {
    let s = toks.iter().map(|t| t.form.as_str()).collect::<Vec<_>>().join(" ");
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Converts to a UD sentence with token ids shuffled, so the file order
/// carries no word-order information.
fn to_ud(toks: &[Tok], sent_id: String, rng: &mut ChaCha8Rng) -> UdSentence {
    let mut perm: Vec<usize> = (0..toks.len()).collect();
    perm.shuffle(rng);
    // new_id[old] = 1-based shuffled id
    let mut new_id = vec![0; toks.len()];
    for (new, &old) in perm.iter().enumerate() {
        new_id[old] = new + 1;
    }
    let tokens = perm
        .iter()
        .map(|&old| {
            let t = &toks[old];
            let mut tok = Token::new(new_id[old], &t.lemma, t.upos, t.head.map_or(0, |h| new_id[h]), t.deprel);
            tok.feats = if t.feats.is_empty() { Vec::new() } else { parse_feats(t.feats) };
            tok
        })
        .collect();
    UdSentence {
        sent_id,
        tokens,
        reference: surface(toks),
    }
}

fn sample_length(rng: &mut ChaCha8Rng, n: usize) -> Vec<Tok> {
    loop {
        let s = Builder::sentence(rng, 3, 2, 2);
        if words(&s) == n {
            return s;
        }
    }
}

fn reinflection_triples(table: &MappingTable) -> String {
    let mut rows: Vec<(String, String, String)> = Vec::new();
    let mut add = |lemma: &str, upos: &str, feats: &str, form: String| {
        let tag = convert(upos, &parse_feats(feats), table).tag.to_string();
        rows.push((lemma.to_string(), tag, form));
    };
    for n in NOUNS {
        add(n, "NOUN", SING, n.to_string());
        add(n, "NOUN", PLUR, plural(n));
    }
    for v in TRANSITIVE.iter().chain(INTRANSITIVE) {
        add(v, "VERB", PRES_3SG, plural(v));
        add(v, "VERB", PRES, v.to_string());
        add(v, "VERB", PAST, past(v));
        add(v, "VERB", GERUND, gerund(v));
        add(v, "VERB", IMPERATIVE, v.to_string());
    }
    for (form, feats) in [("is", PRES_3SG), ("are", PRES_3PL), ("was", PAST_3SG), ("were", PAST_3PL)] {
        add("be", "AUX", feats, form.to_string());
    }
    for a in ADJS {
        add(a, "ADJ", POSITIVE, a.to_string());
    }
    add("the", "DET", DEF, "the".into());
    add("a", "DET", INDEF, "a".into());
    for w in PREPS {
        add(w, "ADP", "", w.to_string());
    }
    for w in ADVS {
        add(w, "ADV", "", w.to_string());
    }
    add("and", "CCONJ", "", "and".into());
    rows.sort();
    rows.dedup();
    let mut out = String::new();
    for (l, t, f) in rows {
        writeln!(out, "{}\t{}\t{}", l, t, f).unwrap();
    }
    out
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/data/toy".into()));
    std::fs::create_dir_all(&dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(2018);
    let mut corpus = String::new();
    for _ in 0..600 {
        let s = Builder::sentence(&mut rng, 2, 2, 1);
        writeln!(corpus, "{}", surface(&s)).unwrap();
    }
    std::fs::write(dir.join("lm_corpus.txt"), corpus)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sentences = vec![imperative(), sample_length(&mut rng, 5), sample_length(&mut rng, 24), sample_length(&mut rng, 23)];
    while sentences.len() < 40 {
        sentences.push(Builder::sentence(&mut rng, 2, 2, 1));
    }
    let ud: Vec<UdSentence> = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| to_ud(s, format!("toy-{:02}", i + 1), &mut rng))
        .collect();
    let mut refs = String::new();
    for s in &ud {
        writeln!(refs, "{}\t{}", s.sent_id, s.reference).unwrap();
    }
    std::fs::write(dir.join("references.txt"), refs)?;
    std::fs::write(dir.join("treebank.conllu"), emit_conllu(&Corpus { sentences: ud }))?;

    std::fs::write(dir.join("reinflection.tsv"), reinflection_triples(&MappingTable::english()))?;
    Ok(())
}
