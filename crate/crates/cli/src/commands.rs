use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use log::{info, warn};
use rayon::prelude::*;
use ud_realize::conllu::parse_conllu;
use ud_realize::eval::evaluate;
use ud_realize::lm::{build_vocab, emit_arpa, parse_arpa, train_lm, NGramModel};
use ud_realize::morphmap::{MappingTable, MorphTag};
use ud_realize::order::realize_order;
use ud_realize::pipeline::{lemma_fallback, Realizer};
use ud_realize::reinflect::{parse_training_data, train, ModelConfig, Seq2SeqModel, TrainConfig};
use ud_realize::text::{is_punct_token, lower_tokens};

use crate::args::{
    EvaluateArgs, Format, OrderArgs, RealizeArgs, ReinflectArgs, ReorderArgs, TrainLmArgs, TrainReinflectorArgs,
};
use crate::config::{resolve, FileConfig, Settings};
use crate::Failure;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Data)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Data)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Data)
}

fn write_or_print(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, contents),
        None => {
            print!("{}", contents);
            Ok(())
        }
    }
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(anyhow!("{}", e))
}

fn load_lm(path: &Path) -> Result<NGramModel, Failure> {
    parse_arpa(&read(path)?).map_err(|e| data(format!("{}: {}", path.display(), e)))
}

fn settings(args: &OrderArgs) -> Result<Settings, Failure> {
    let file = match &args.config {
        Some(p) => FileConfig::parse(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {}", p.display(), e)))?,
        None => FileConfig::default(),
    };
    resolve(args, &file)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Internal(e.into()))
}

/// The sentence part of a corpus line: text after the first tab, if any.
fn corpus_sentence(line: &str) -> &str {
    line.split_once('\t').map_or(line, |(_, s)| s)
}

pub fn train_lm_cmd(args: &TrainLmArgs) -> Result<(), Failure> {
    let text = read(&args.corpus)?;
    let sentences: Vec<String> = text
        .lines()
        .map(|l| {
            lower_tokens(corpus_sentence(l))
                .into_iter()
                .filter(|t| args.keep_punct || !is_punct_token(t))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .filter(|s| !s.is_empty())
        .collect();
    let vocab = build_vocab(&sentences);
    let model = train_lm(&sentences, args.order as usize, &vocab)
        .map_err(|e| data(format!("{}: {}", args.corpus.display(), e)))?;
    write(&args.lm_out, emit_arpa(&model))?;
    write(&args.vocab_out, vocab.to_text())?;
    let tokens: usize = sentences.iter().map(|s| s.split(' ').count()).sum();
    println!("sentences\t{}", sentences.len());
    println!("tokens\t{}", tokens);
    println!("vocabulary\t{}", vocab.len());
    for n in 1..=model.order() {
        println!("{}-grams\t{}", n, model.table(n).len());
    }
    Ok(())
}

pub fn train_reinflector_cmd(args: &TrainReinflectorArgs) -> Result<(), Failure> {
    let (examples, diags) = parse_training_data(&read(&args.data)?);
    for d in &diags {
        warn!("{}: {}", args.data.display(), d);
    }
    if !diags.is_empty() {
        eprintln!("skipped {} malformed line(s)", diags.len());
    }
    if examples.is_empty() {
        return Err(data(format!("{}: no training examples", args.data.display())));
    }
    let model_cfg = ModelConfig {
        hidden: args.hidden as usize,
        embed_dim: args.embed as usize,
        max_len: args.max_len as usize,
    };
    let train_cfg = TrainConfig {
        epochs: args.epochs as usize,
        lr: args.lr,
        batch_size: args.batch_size as usize,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let model = Seq2SeqModel::for_data(&examples, model_cfg, args.seed);
    info!("training on {} examples", examples.len());
    let trained = train(model, &examples, &train_cfg).map_err(|e| match e {
        ud_realize::reinflect::ReinflectError::InvalidExample { .. } => data(e),
        other => Failure::Internal(anyhow!("training failed: {}", other)),
    })?;
    for (i, loss) in trained.loss_trace.iter().enumerate() {
        println!("epoch {}\tloss {:.6}", i + 1, loss);
    }
    let acc = ud_realize::reinflect::exact_match(&trained.model, &examples).map_err(|e| Failure::Internal(e.into()))?;
    println!("train exact match\t{:.4}", acc);
    write(&args.out, trained.model.to_bytes())?;
    Ok(())
}

pub fn realize_cmd(args: &RealizeArgs) -> Result<(), Failure> {
    let settings = settings(&args.order)?;
    let parsed = parse_conllu(&read(&args.conllu)?);
    for d in &parsed.diagnostics {
        warn!("{}: {}", args.conllu.display(), d);
    }
    let corpus = parsed.value;
    if corpus.is_empty() {
        return Err(data(format!("{}: no sentences", args.conllu.display())));
    }
    let lm = load_lm(&args.lm)?;
    let reinflector = match &args.reinflector {
        Some(p) => Some(Seq2SeqModel::from_bytes(&read_bytes(p)?).map_err(|e| data(format!("{}: {}", p.display(), e)))?),
        None => None,
    };
    let table = MappingTable::english();
    let realizer = Realizer {
        lm: &lm,
        reinflector: reinflector.as_ref(),
        table: &table,
        order: &settings.order,
    };
    let results: Vec<_> = pool(settings.jobs)?.install(|| {
        corpus
            .sentences
            .par_iter()
            .map(|s| (s, std::panic::catch_unwind(|| realizer.realize(s))))
            .collect()
    });

    let mut out = String::new();
    let mut failed = 0;
    for (sentence, result) in &results {
        let text = match result {
            Ok(r) => {
                for w in &r.warnings {
                    warn!("{}: {}", r.sent_id, w);
                }
                match (r.method, r.lm_score) {
                    (Some(m), Some(score)) => info!("{}\t{:?}\t{:.4}", r.sent_id, m, score),
                    _ => failed += 1,
                }
                r.text.clone()
            }
            Err(_) => {
                warn!("{}: internal error; emitting lemmas", sentence.sent_id);
                failed += 1;
                lemma_fallback(sentence)
            }
        };
        writeln!(out, "{}\t{}", sentence.sent_id, text).unwrap();
    }
    write(&args.out, out)?;
    println!("sentences\t{}", results.len());
    println!("fallbacks\t{}", failed);
    if failed == results.len() {
        return Err(data("every sentence failed"));
    }
    Ok(())
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<(), Failure> {
    let load = |p: &Path| -> Result<Vec<(String, String)>, Failure> {
        let parsed = ud_realize::conllu::parse_reference_text(&read(p)?);
        for d in &parsed.diagnostics {
            warn!("{}: {}", p.display(), d);
        }
        Ok(parsed.value)
    };
    let preds: HashMap<String, String> = load(&args.pred)?.into_iter().collect();
    let refs = load(&args.reference)?;
    let mut ids = Vec::new();
    let (mut hyps, mut golds) = (Vec::new(), Vec::new());
    let mut seen = std::collections::HashSet::new();
    for (id, gold) in refs.iter().rev() {
        // Later duplicates win, matching the reference reader.
        if !seen.insert(id.as_str()) {
            continue;
        }
        match preds.get(id) {
            Some(h) => {
                ids.push(id.clone());
                hyps.push(h.clone());
                golds.push(gold.clone());
            }
            None => warn!("no prediction for {}", id),
        }
    }
    ids.reverse();
    hyps.reverse();
    golds.reverse();
    for id in preds.keys().filter(|id| !seen.contains(id.as_str())) {
        warn!("prediction {} has no reference", id);
    }
    if ids.is_empty() {
        return Err(data("predictions and references share no sentence ids"));
    }
    let report = evaluate(&hyps, &golds).map_err(|e| Failure::Internal(e.into()))?;
    match args.format {
        Format::Table => print!("{}", report.to_table()),
        Format::Tsv => print!("{}", report.to_tsv()),
    }
    if args.per_sentence {
        for (id, s) in ids.iter().zip(&report.per_sentence) {
            println!("{}\t{:.4}\t{:.4}\t{:.4}", id, s.bleu, s.nist, s.dist);
        }
    }
    Ok(())
}

pub fn reorder_cmd(args: &ReorderArgs) -> Result<(), Failure> {
    let settings = settings(&args.order)?;
    let lm = load_lm(&args.lm)?;
    let text = read(&args.input)?;
    let lines: Vec<(String, Vec<String>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match l.split_once('\t') {
            Some((id, words)) => (id.trim().to_string(), words.split_whitespace().map(String::from).collect()),
            None => ((i + 1).to_string(), l.split_whitespace().map(String::from).collect()),
        })
        .collect();
    let results: Vec<String> = pool(settings.jobs)?.install(|| {
        lines
            .par_iter()
            .map(|(id, words)| match realize_order(words, &lm, &settings.order) {
                Ok(r) => r.text,
                Err(e) => {
                    warn!("{}: {}; keeping input order", id, e);
                    words.join(" ")
                }
            })
            .collect()
    });
    let mut out = String::new();
    for ((id, _), text) in lines.iter().zip(&results) {
        writeln!(out, "{}\t{}", id, text).unwrap();
    }
    write_or_print(args.out.as_deref(), &out)
}

pub fn reinflect_cmd(args: &ReinflectArgs) -> Result<(), Failure> {
    let model =
        Seq2SeqModel::from_bytes(&read_bytes(&args.model)?).map_err(|e| data(format!("{}: {}", args.model.display(), e)))?;
    let text = read(&args.input)?;
    let mut out = String::new();
    let (mut gold_total, mut hits) = (0usize, 0usize);
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            warn!("{} line {}: expected lemma<TAB>TAG", args.input.display(), i + 1);
            continue;
        }
        let tag: MorphTag = match cols[1].parse() {
            Ok(t) => t,
            Err(e) => {
                warn!("{} line {}: {}", args.input.display(), i + 1, e);
                continue;
            }
        };
        let form = model.predict(cols[0], &tag).unwrap_or_else(|e| {
            warn!("{} line {}: {}; keeping lemma", args.input.display(), i + 1, e);
            cols[0].to_string()
        });
        if let Some(gold) = cols.get(2) {
            gold_total += 1;
            hits += (form == *gold) as usize;
        }
        writeln!(out, "{}\t{}\t{}", cols[0], cols[1], form).unwrap();
    }
    write_or_print(args.out.as_deref(), &out)?;
    if gold_total > 0 {
        eprintln!("exact match\t{:.4}\t({}/{})", hits as f64 / gold_total as f64, hits, gold_total);
    }
    Ok(())
}
