//! Reading and writing CoNLL-U treebanks and the parallel reference file.
//!
//! Only syntactic words are modeled: multiword-token ranges (`3-4`) and empty
//! nodes (`3.1`) are dropped on input. Problems are reported as
//! [`Diagnostic`]s; a malformed token line causes its whole sentence to be
//! skipped while parsing continues with the next block.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::diag::Diagnostic;

/// One node of a UD tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based id within the sentence. Carries no word-order information.
    pub id: usize,
    pub lemma: String,
    pub upos: String,
    /// Empty when the column is `_`.
    pub xpos: String,
    /// Features in file order. A malformed item without `=` is kept as
    /// `(item, "")` so it survives a round trip.
    pub feats: Vec<(String, String)>,
    /// 0 for the root.
    pub head: usize,
    pub deprel: String,
    /// Surface form; empty when the column is `_`.
    pub form: String,
}

impl Token {
    pub fn new(id: usize, lemma: &str, upos: &str, head: usize, deprel: &str) -> Self {
        Token {
            id,
            lemma: lemma.to_string(),
            upos: upos.to_string(),
            xpos: String::new(),
            feats: Vec::new(),
            head,
            deprel: deprel.to_string(),
            form: String::new(),
        }
    }

    /// True if some FEATS item could not be split into `Key=Value`.
    pub fn has_malformed_feats(&self) -> bool {
        self.feats.iter().any(|(k, v)| k.is_empty() || v.is_empty())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UdSentence {
    pub sent_id: String,
    pub tokens: Vec<Token>,
    /// Gold ordered sentence, empty if unknown.
    pub reference: String,
}

impl UdSentence {
    /// Structural checks: ids are exactly `1..=n`, heads point at existing
    /// tokens, no self-loops, exactly one root.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.tokens.len();
        let ids: HashSet<usize> = self.tokens.iter().map(|t| t.id).collect();
        if ids.len() != n || (1..=n).any(|i| !ids.contains(&i)) {
            out.push(Diagnostic::new(format!(
                "sentence {}: token ids are not exactly 1..{}",
                self.sent_id, n
            )));
        }
        for t in &self.tokens {
            if t.head == t.id {
                out.push(Diagnostic::new(format!(
                    "sentence {}: token {} is its own head",
                    self.sent_id, t.id
                )));
            } else if t.head != 0 && !ids.contains(&t.head) {
                out.push(Diagnostic::new(format!(
                    "sentence {}: token {} has dangling head {}",
                    self.sent_id, t.id, t.head
                )));
            }
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if n > 0 && roots != 1 {
            out.push(Diagnostic::new(format!(
                "sentence {}: expected exactly one root, found {}",
                self.sent_id, roots
            )));
        }
        out
    }

    /// Tokens sorted by id.
    pub fn tokens_by_id(&self) -> Vec<&Token> {
        let mut toks: Vec<&Token> = self.tokens.iter().collect();
        toks.sort_by_key(|t| t.id);
        toks
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<UdSentence>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Result of a lenient parse: whatever could be read plus what went wrong.
#[derive(Clone, Debug, Default)]
pub struct Parsed<T> {
    pub value: T,
    pub diagnostics: Vec<Diagnostic>,
}

enum LineKind {
    Token(Token),
    Skipped,
}

fn parse_token_line(line: &str) -> Result<LineKind, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(format!("expected 10 tab-separated columns, found {}", cols.len()));
    }
    let id_col = cols[0];
    if id_col.contains('-') || id_col.contains('.') {
        return Ok(LineKind::Skipped);
    }
    let id: usize = id_col
        .parse()
        .map_err(|_| format!("invalid token id {:?}", id_col))?;
    if id == 0 {
        return Err("token id must be at least 1".to_string());
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| format!("non-integer HEAD {:?}", cols[6]))?;
    let field = |s: &str| if s == "_" { String::new() } else { s.to_string() };
    Ok(LineKind::Token(Token {
        id,
        form: field(cols[1]),
        lemma: field(cols[2]),
        upos: field(cols[3]),
        xpos: field(cols[4]),
        feats: parse_feats(cols[5]),
        head,
        deprel: field(cols[7]),
    }))
}

/// Splits a FEATS column. `_` is the empty list.
pub fn parse_feats(col: &str) -> Vec<(String, String)> {
    if col == "_" || col.is_empty() {
        return Vec::new();
    }
    col.split('|')
        .map(|item| match item.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (item.to_string(), String::new()),
        })
        .collect()
}

/// Parses a CoNLL-U document.
///
/// Sentence ids come from `# sent_id = ...` comments, falling back to the
/// running sentence index (1-based) when absent. Duplicate ids are reported.
/// A `# text = ...` comment becomes the sentence's reference.
pub fn parse_conllu(text: &str) -> Parsed<Corpus> {
    let mut diagnostics = Vec::new();
    let mut sentences = Vec::new();
    let mut seen_ids = HashSet::new();

    let mut block_index = 0usize;
    let mut sent_id: Option<String> = None;
    let mut reference = String::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut broken = false;
    let mut in_block = false;

    let mut finish = |sent_id: &mut Option<String>,
                      reference: &mut String,
                      tokens: &mut Vec<Token>,
                      broken: &mut bool,
                      in_block: &mut bool,
                      diagnostics: &mut Vec<Diagnostic>,
                      line_no: usize| {
        if !*in_block {
            return;
        }
        block_index += 1;
        let id = sent_id.take().unwrap_or_else(|| block_index.to_string());
        let toks = std::mem::take(tokens);
        let reference = std::mem::take(reference);
        if *broken {
            diagnostics.push(Diagnostic::at_line(
                line_no,
                format!("sentence {} skipped because of malformed lines", id),
            ));
        } else if !toks.is_empty() {
            if !seen_ids.insert(id.clone()) {
                diagnostics.push(Diagnostic::at_line(
                    line_no,
                    format!("duplicate sent_id {}", id),
                ));
            }
            let sentence = UdSentence {
                sent_id: id,
                tokens: toks,
                reference,
            };
            diagnostics.extend(sentence.validate());
            sentences.push(sentence);
        }
        *broken = false;
        *in_block = false;
    };

    let mut line_no = 0;
    for (i, raw) in text.lines().enumerate() {
        line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            finish(
                &mut sent_id,
                &mut reference,
                &mut tokens,
                &mut broken,
                &mut in_block,
                &mut diagnostics,
                line_no,
            );
            continue;
        }
        in_block = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => sent_id = Some(value.trim().to_string()),
                    "text" => reference = value.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        match parse_token_line(line) {
            Ok(LineKind::Token(t)) => tokens.push(t),
            Ok(LineKind::Skipped) => {}
            Err(msg) => {
                diagnostics.push(Diagnostic::at_line(line_no, msg));
                broken = true;
            }
        }
    }
    finish(
        &mut sent_id,
        &mut reference,
        &mut tokens,
        &mut broken,
        &mut in_block,
        &mut diagnostics,
        line_no,
    );

    Parsed {
        value: Corpus { sentences },
        diagnostics,
    }
}

/// Parses the reference file: one `sent_id<TAB>sentence` record per line.
/// Blank lines are ignored; a line without a tab yields an empty id.
pub fn parse_reference_text(text: &str) -> Parsed<Vec<(String, String)>> {
    let mut value = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        match line.split_once('\t') {
            Some((id, sentence)) => value.push((id.trim().to_string(), sentence.trim().to_string())),
            None => {
                diagnostics.push(Diagnostic::at_line(i + 1, "no tab separator; sentence id left empty"));
                value.push((String::new(), line.trim().to_string()));
            }
        }
    }
    Parsed { value, diagnostics }
}

/// Sets `reference` on every sentence whose id appears in `refs`. Later
/// duplicates override earlier ones.
pub fn attach_references(mut corpus: Corpus, refs: &[(String, String)]) -> Parsed<Corpus> {
    let mut diagnostics = Vec::new();
    let mut by_id: HashMap<&str, &str> = HashMap::new();
    for (id, sentence) in refs {
        if by_id.insert(id, sentence).is_some() {
            diagnostics.push(Diagnostic::new(format!(
                "duplicate reference id {}; last one wins",
                id
            )));
        }
    }
    for s in &mut corpus.sentences {
        match by_id.get(s.sent_id.as_str()) {
            Some(r) => s.reference = r.to_string(),
            None => diagnostics.push(Diagnostic::new(format!(
                "no reference for sentence {}",
                s.sent_id
            ))),
        }
    }
    Parsed {
        value: corpus,
        diagnostics,
    }
}

fn sorted_feats(feats: &[(String, String)]) -> Vec<&(String, String)> {
    let mut v: Vec<&(String, String)> = feats.iter().collect();
    v.sort_by(|a, b| {
        a.0.to_lowercase()
            .cmp(&b.0.to_lowercase())
            .then_with(|| a.0.cmp(&b.0))
    });
    v
}

/// Renders a FEATS column, keys sorted case-insensitively.
pub fn format_feats(feats: &[(String, String)]) -> String {
    if feats.is_empty() {
        return "_".to_string();
    }
    sorted_feats(feats)
        .into_iter()
        .map(|(k, v)| if v.is_empty() { k.clone() } else { format!("{}={}", k, v) })
        .collect::<Vec<_>>()
        .join("|")
}

/// Writes a corpus back to CoNLL-U.
pub fn emit_conllu(corpus: &Corpus) -> String {
    let mut out = String::new();
    let col = |s: &str| if s.is_empty() { "_".to_string() } else { s.to_string() };
    for s in &corpus.sentences {
        writeln!(out, "# sent_id = {}", s.sent_id).unwrap();
        if !s.reference.is_empty() {
            writeln!(out, "# text = {}", s.reference).unwrap();
        }
        for t in &s.tokens {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t_\t_",
                t.id,
                col(&t.form),
                col(&t.lemma),
                col(&t.upos),
                col(&t.xpos),
                format_feats(&t.feats),
                t.head,
                col(&t.deprel),
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "1\tread\tread\tVERB\t_\tTense=Past\t0\troot\t_\t_\n\
                       2\tbook\tbook\tNOUN\t_\tNumber=Sing\t1\tobj\t_\t_\n";

    #[test]
    fn two_token_block() {
        let p = parse_conllu(TWO);
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        let c = p.value;
        assert_eq!(c.len(), 1);
        let s = &c.sentences[0];
        assert_eq!(s.sent_id, "1");
        assert_eq!(s.tokens.len(), 2);
        assert_eq!(s.tokens[1].head, 1);
        assert_eq!(s.tokens[1].lemma, "book");
        assert_eq!(s.tokens[0].feats, vec![("Tense".into(), "Past".into())]);
    }

    #[test]
    fn text_comment_is_reference() {
        let p = parse_conllu("# sent_id = a\n# text = Hi there .\n1\thi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n\n1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n");
        assert_eq!(p.value.sentences[0].reference, "Hi there .");
        assert_eq!(p.value.sentences[1].reference, "");
        assert_eq!(parse_conllu(&emit_conllu(&p.value)).value, p.value);
    }

    #[test]
    fn empty_input() {
        let p = parse_conllu("");
        assert!(p.value.is_empty());
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn multiword_range_is_skipped() {
        let text = "# sent_id = mw\n\
                    1\tI\tI\tPRON\t_\t_\t3\tnsubj\t_\t_\n\
                    2-3\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    2\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n\
                    3\tnot\tnot\tPART\t_\t_\t0\troot\t_\t_\n\
                    3.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n";
        let p = parse_conllu(text);
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        let s = &p.value.sentences[0];
        assert_eq!(s.sent_id, "mw");
        let ids: Vec<usize> = s.tokens.iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
    }

    #[test]
    fn malformed_line_skips_sentence_only() {
        let text = format!(
            "# sent_id = bad\n1\ta\ta\tX\t_\t_\t0\n\n# sent_id = bad2\n1\ta\ta\tX\t_\t_\tzero\troot\t_\t_\n\n# sent_id = ok\n{}",
            TWO
        );
        let p = parse_conllu(&text);
        assert_eq!(p.value.len(), 1);
        assert_eq!(p.value.sentences[0].sent_id, "ok");
        assert!(p.diagnostics.iter().any(|d| d.line == Some(2)));
        assert!(p.diagnostics.iter().any(|d| d.line == Some(5) && d.message.contains("HEAD")));
    }

    #[test]
    fn structural_violations_are_flagged() {
        let text = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t0\troot\t_\t_\n3\tc\tc\tX\t_\t_\t9\tdep\t_\t_\n";
        let p = parse_conllu(text);
        assert_eq!(p.value.len(), 1);
        assert!(p.diagnostics.iter().any(|d| d.message.contains("root")));
        assert!(p.diagnostics.iter().any(|d| d.message.contains("dangling")));
    }

    #[test]
    fn reference_records() {
        let p = parse_reference_text("s1\tThe boy reads a book .");
        assert_eq!(p.value, vec![("s1".to_string(), "The boy reads a book .".to_string())]);
        assert!(parse_reference_text("").value.is_empty());
        let two = parse_reference_text("a\tx\n\nb\ty\n");
        assert_eq!(two.value.len(), 2);
        assert_eq!(two.value[1].0, "b");
        let notab = parse_reference_text("just words");
        assert_eq!(notab.value[0].0, "");
        assert_eq!(notab.diagnostics.len(), 1);
    }

    fn one_sentence(id: &str) -> Corpus {
        let mut c = parse_conllu(TWO).value;
        c.sentences[0].sent_id = id.to_string();
        c
    }

    #[test]
    fn attaching_references() {
        let p = attach_references(one_sentence("s1"), &[("s1".into(), "x".into())]);
        assert_eq!(p.value.sentences[0].reference, "x");
        assert!(p.diagnostics.is_empty());

        let p = attach_references(one_sentence("s1"), &[("s2".into(), "x".into())]);
        assert_eq!(p.value.sentences[0].reference, "");
        assert_eq!(p.diagnostics.len(), 1);

        let p = attach_references(
            one_sentence("s1"),
            &[("s1".into(), "first".into()), ("s1".into(), "second".into())],
        );
        assert_eq!(p.value.sentences[0].reference, "second");
        assert_eq!(p.diagnostics.len(), 1);
    }

    #[test]
    fn emit_round_trip_and_format() {
        let c = parse_conllu(TWO).value;
        let out = emit_conllu(&c);
        assert_eq!(
            out,
            format!("# sent_id = 1\n{}\n", TWO)
        );
        assert_eq!(parse_conllu(&out).value, c);
        assert_eq!(emit_conllu(&Corpus::default()), "");

        let mut t = Token::new(1, "x", "X", 0, "root");
        t.feats.clear();
        let c = Corpus {
            sentences: vec![UdSentence {
                sent_id: "e".into(),
                tokens: vec![t],
                reference: String::new(),
            }],
        };
        let line = emit_conllu(&c).lines().nth(1).unwrap().to_string();
        assert_eq!(line.split('\t').nth(5), Some("_"));
    }

    #[test]
    fn feats_sorted_case_insensitively_on_emit() {
        let feats = parse_feats("VerbForm=Fin|mood=Ind|Tense=Past");
        assert_eq!(format_feats(&feats), "mood=Ind|Tense=Past|VerbForm=Fin");
    }

    #[test]
    fn malformed_feature_item_is_kept() {
        let feats = parse_feats("Number|Tense=Past");
        assert_eq!(feats[0], ("Number".to_string(), String::new()));
        let mut t = Token::new(1, "x", "X", 0, "root");
        t.feats = feats;
        assert!(t.has_malformed_feats());
        assert_eq!(format_feats(&t.feats), "Number|Tense=Past");
    }
}
