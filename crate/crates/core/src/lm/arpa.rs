//! ARPA backoff model text format.
//!
//! ```text
//! \data\
//! ngram 1=3
//!
//! \1-grams:
//! -0.25527250510330607 </s>
//! -99 <s> -0.3010299956639812
//! ...
//!
//! \end\
//! ```
//!
//! Fields within an n-gram line are tab-separated on output; any
//! whitespace is accepted on input.
//!
//! Probabilities are written with Rust's shortest round-trip float
//! formatting, so a parse of an emitted model is score-identical.

use std::fmt::Write as _;

use super::{LmError, NGramEntry, NGramModel, NGramTable, Vocabulary};

pub fn emit_arpa(model: &NGramModel) -> String {
    let mut out = String::new();
    let vocab = model.vocab();
    out.push_str("\n\\data\\\n");
    for n in 1..=model.order() {
        writeln!(out, "ngram {}={}", n, model.table(n).len()).unwrap();
    }
    for n in 1..=model.order() {
        write!(out, "\n\\{}-grams:\n", n).unwrap();
        let mut rows: Vec<(Vec<&str>, &NGramEntry)> = model
            .table(n)
            .iter()
            .map(|(k, e)| (k.iter().map(|&id| vocab.word(id)).collect(), e))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        for (words, e) in rows {
            write!(out, "{}\t{}", e.logprob, words.join(" ")).unwrap();
            if n < model.order() {
                if let Some(b) = e.backoff {
                    write!(out, "\t{}", b).unwrap();
                }
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

fn err(line: usize, message: impl Into<String>) -> LmError {
    LmError::Arpa {
        line,
        message: message.into(),
    }
}

pub fn parse_arpa(text: &str) -> Result<NGramModel, LmError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .collect();
    let mut pos = lines
        .iter()
        .position(|(_, l)| *l == "\\data\\")
        .ok_or_else(|| err(1, "missing \\data\\ header"))?
        + 1;

    let mut declared: Vec<usize> = Vec::new();
    while pos < lines.len() {
        let (no, l) = lines[pos];
        if l.is_empty() {
            pos += 1;
            continue;
        }
        let Some(spec) = l.strip_prefix("ngram ") else {
            break;
        };
        let (n, count) = spec
            .split_once('=')
            .ok_or_else(|| err(no, "malformed ngram count line"))?;
        let n: usize = n.trim().parse().map_err(|_| err(no, "bad n-gram order"))?;
        let count: usize = count.trim().parse().map_err(|_| err(no, "bad n-gram count"))?;
        if n != declared.len() + 1 {
            return Err(err(no, format!("expected count for order {}", declared.len() + 1)));
        }
        declared.push(count);
        pos += 1;
    }
    if declared.is_empty() {
        return Err(err(lines.get(pos).map_or(lines.len(), |l| l.0), "no ngram counts"));
    }
    let order = declared.len();

    let mut raw: Vec<Vec<(usize, Vec<String>, NGramEntry)>> = Vec::with_capacity(order);
    for n in 1..=order {
        while pos < lines.len() && lines[pos].1.is_empty() {
            pos += 1;
        }
        let header = format!("\\{}-grams:", n);
        match lines.get(pos) {
            Some((_, l)) if *l == header => pos += 1,
            Some((no, _)) => return Err(err(*no, format!("expected {}", header))),
            None => return Err(err(lines.len(), format!("missing {}", header))),
        }
        let mut section = Vec::with_capacity(declared[n - 1]);
        while pos < lines.len() {
            let (no, l) = lines[pos];
            if l.is_empty() || l.starts_with('\\') {
                break;
            }
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != n + 1 && fields.len() != n + 2 {
                return Err(err(no, format!("expected {} words and a probability", n)));
            }
            let logprob: f64 = fields[0].parse().map_err(|_| err(no, "bad log probability"))?;
            let backoff = match fields.get(n + 1) {
                Some(b) => Some(b.parse::<f64>().map_err(|_| err(no, "bad backoff weight"))?),
                None => None,
            };
            let words = fields[1..=n].iter().map(|w| w.to_string()).collect();
            section.push((no, words, NGramEntry { logprob, backoff }));
            pos += 1;
        }
        if section.len() != declared[n - 1] {
            return Err(err(
                lines.get(pos).map_or(lines.len(), |l| l.0),
                format!(
                    "{}-gram section has {} entries, header declares {}",
                    n,
                    section.len(),
                    declared[n - 1]
                ),
            ));
        }
        raw.push(section);
    }
    while pos < lines.len() && lines[pos].1.is_empty() {
        pos += 1;
    }
    match lines.get(pos) {
        Some((_, l)) if *l == "\\end\\" => {}
        Some((no, _)) => return Err(err(*no, "expected \\end\\")),
        None => return Err(err(lines.len(), "missing \\end\\")),
    }

    let vocab = Vocabulary::new(raw[0].iter().map(|(_, w, _)| w[0].as_str()));
    let mut tables: Vec<NGramTable> = Vec::with_capacity(order);
    for section in raw {
        let mut t = NGramTable::with_capacity(section.len());
        for (no, words, e) in section {
            let ids: Option<Vec<u32>> = words.iter().map(|w| vocab.id(w)).collect();
            let ids = ids.ok_or_else(|| err(no, "n-gram uses a word with no unigram entry"))?;
            t.insert(ids.into_boxed_slice(), e);
        }
        tables.push(t);
    }
    Ok(NGramModel::from_parts(order, vocab, tables))
}
