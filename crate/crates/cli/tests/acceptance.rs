//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p ud-realize-cli --test acceptance`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ud_realize::conllu::parse_conllu;
use ud_realize::eval::{bleu, dist, tokenize};
use ud_realize::lm::{build_vocab, emit_arpa, parse_arpa, train_lm, NGramModel, BOS, EOS};
use ud_realize::morphmap::MappingTable;
use ud_realize::order::{chunk_schemes, exhaustive, method1, preprocess, Method, OrderConfig, WordBag};
use ud_realize::pipeline::Realizer;
use ud_realize::reinflect::synth::english_morphology;
use ud_realize::reinflect::{
    exact_match, parse_training_data, train, ModelConfig, Seq2SeqModel, TrainConfig,
};
use ud_realize::text::is_punct_token;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn toy(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/toy").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(toy(name)).unwrap()
}

/// The toy LM corpus with punctuation tokens removed, as `train-lm` does.
fn toy_sentences() -> Vec<String> {
    read("lm_corpus.txt")
        .lines()
        .map(|l| {
            tokenize(l)
                .into_iter()
                .filter(|t| !is_punct_token(t))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .filter(|s| !s.is_empty())
        .collect()
}

fn toy_lm() -> NGramModel {
    let s = toy_sentences();
    train_lm(&s, 3, &build_vocab(&s)).unwrap()
}

fn reinflection_accuracy() -> Outcome {
    let split = english_morphology(700, 0.1, 1);
    let total = split.train.len() + split.held_out.len();
    if total < 2000 {
        return Err(format!("only {} triples", total));
    }
    let start = Instant::now();
    let model = Seq2SeqModel::for_data(&split.train, ModelConfig::default(), 1);
    let trained = train(model, &split.train, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let acc = exact_match(&trained.model, &split.held_out).map_err(|e| e.to_string())?;
    let detail = format!(
        "{} triples, held-out exact match {:.4} (need >= 0.90), trained in {:.1}s (need < 900s)",
        total, acc, secs
    );
    if acc >= 0.90 && secs < 900.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_check() -> Outcome {
    let split = english_morphology(4, 0.0, 9);
    let cfg = ModelConfig {
        hidden: 6,
        embed_dim: 5,
        max_len: 16,
    };
    let model = Seq2SeqModel::for_data(&split.train, cfg, 3);
    let batch: Vec<_> = split.train.iter().take(4).map(|ex| model.encode_example(ex).0).collect();
    let (_, grad) = model.grad(&batch).map_err(|e| e.to_string())?;

    // Coordinates that influence the loss; untouched rows would pass trivially.
    let mut coords = Vec::new();
    for (b, block) in grad.blocks().iter().enumerate() {
        for (i, &g) in block.data.iter().enumerate() {
            if g.abs() > 1e-8 {
                coords.push((b, i));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    coords.shuffle(&mut rng);
    coords.truncate(150);
    if coords.len() < 100 {
        return Err(format!("only {} coordinates with nonzero gradient", coords.len()));
    }
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for &(b, i) in &coords {
        let mut plus = model.clone();
        plus.params.blocks_mut()[b].data[i] += eps;
        let mut minus = model.clone();
        minus.params.blocks_mut()[b].data[i] -= eps;
        let fd = (plus.batch_loss(&batch).unwrap() - minus.batch_loss(&batch).unwrap()) / (2.0 * eps);
        let an = grad.blocks()[b].data[i];
        worst = worst.max((an - fd).abs() / an.abs().max(fd.abs()).max(1e-7));
    }
    let detail = format!("{} parameters, max relative error {:.2e} (need < 1e-4)", coords.len(), worst);
    if worst < 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lm_normalization() -> Outcome {
    let sentences = toy_sentences();
    if sentences.len() < 500 {
        return Err(format!("toy corpus has only {} sentences", sentences.len()));
    }
    let lm = toy_lm();
    let vocab: Vec<String> = lm.vocab().words().to_vec();
    let content: Vec<&str> = vocab.iter().map(String::as_str).filter(|w| !w.starts_with('<')).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_sum = 0.0f64;
    for _ in 0..100 {
        let len = rng.gen_range(0..4);
        let mut hist = vec![BOS];
        hist.extend((0..len).map(|_| *content.choose(&mut rng).unwrap()));
        let total: f64 = vocab.iter().map(|w| lm.prob(&hist, w)).sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
    }

    let back = parse_arpa(&emit_arpa(&lm)).map_err(|e| e.to_string())?;
    let mut worst_drift = 0.0f64;
    for _ in 0..1000 {
        let len = rng.gen_range(1..12);
        let mut q = vec![BOS];
        q.extend((0..len).map(|_| if rng.gen_bool(0.05) { "unseenword" } else { *content.choose(&mut rng).unwrap() }));
        q.push(EOS);
        worst_drift = worst_drift.max((lm.score(&q).total - back.score(&q).total).abs());
    }
    let detail = format!(
        "{} sentences; max |sum P - 1| = {:.1e} over 100 histories (need <= 1e-6); max ARPA drift {:.1e} over 1000 queries (need <= 1e-9)",
        sentences.len(),
        worst_sum,
        worst_drift
    );
    if worst_sum <= 1e-6 && worst_drift <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

fn ordering_oracle() -> Outcome {
    let lm = toy_lm();
    let sentences = toy_sentences();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let start = Instant::now();
    let mut agree = 0;
    for _ in 0..200 {
        // Bags drawn from corpus sentences, so ties and repeats occur.
        let s: Vec<String> = tokenize(sentences.choose(&mut rng).unwrap());
        let k = rng.gen_range(1..=4.min(s.len()));
        let bag: Vec<String> = s.choose_multiple(&mut rng, k).cloned().collect();
        let got = exhaustive(&WordBag::new(&bag), &lm, 4).map_err(|e| e.to_string())?;
        let best = permutations(&bag)
            .into_iter()
            .map(|p| (lm.score_sentence(&p).total, p))
            .reduce(|a, b| match b.0.partial_cmp(&a.0).unwrap() {
                Ordering::Greater => b,
                Ordering::Equal if b.1 < a.1 => b,
                _ => a,
            })
            .unwrap();
        agree += (got.sequence == best.1) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("{}/200 bags agree with brute force in {:.2}s (need 200 in < 10s)", agree, secs);
    if agree == 200 && secs < 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn load_toy_reinflector() -> Seq2SeqModel {
    let (examples, _) = parse_training_data(&read("reinflection.tsv"));
    let model = Seq2SeqModel::for_data(&examples, ModelConfig::default(), 1);
    train(model, &examples, &TrainConfig::default()).unwrap().model
}

fn permutation_invariant() -> Outcome {
    let lm = toy_lm();
    let reinflector = load_toy_reinflector();
    let corpus = parse_conllu(&read("treebank.conllu")).value;
    let table = MappingTable::english();
    let cfg = OrderConfig::default();
    let realizer = Realizer {
        lm: &lm,
        reinflector: Some(&reinflector),
        table: &table,
        order: &cfg,
    };
    let mut violations = 0;
    let mut methods: BTreeMap<String, usize> = BTreeMap::new();
    let mut lengths = Vec::new();
    for s in &corpus.sentences {
        let r = realizer.realize(s);
        let bag = preprocess(&r.forms).map_err(|e| format!("{}: {}", s.sent_id, e))?;
        lengths.push(bag.len());
        *methods.entry(format!("{:?}", r.method)).or_default() += 1;
        let mut want: Vec<String> = bag.words().to_vec();
        let body = r.text.strip_suffix(" .").unwrap_or(&r.text);
        let mut got: Vec<String> = tokenize(body);
        want.sort();
        got.sort();
        if want != got {
            violations += 1;
            eprintln!("  {}: {:?} vs {:?}", s.sent_id, got, want);
        }
    }
    let needed = [1, 5, 24];
    let missing: Vec<_> = needed.iter().filter(|n| !lengths.contains(n)).collect();
    let all_branches = [Method::Exhaustive, Method::Method1, Method::Method2]
        .iter()
        .all(|m| methods.contains_key(&format!("{:?}", Some(*m))));
    let detail = format!(
        "{} sentences, {} violations, methods {:?}",
        corpus.sentences.len(),
        violations,
        methods
    );
    if violations == 0 && missing.is_empty() && all_branches {
        Ok(detail)
    } else {
        Err(format!("{}; missing lengths {:?}", detail, missing))
    }
}

fn scheme_reconstruction() -> Outcome {
    let got = chunk_schemes(6);
    let want = vec![vec![3, 3], vec![3, 2, 1], vec![2, 2, 2]];
    if got == want {
        Ok(format!("chunk_schemes(6) = {:?}", got))
    } else {
        Err(format!("chunk_schemes(6) = {:?}, want {:?}", got, want))
    }
}

fn method1_counting() -> Outcome {
    let lm = toy_lm();
    let words: Vec<String> = tokenize("the old teacher walked quickly near a big red house");
    let mut parts = Vec::new();
    for n in [5u64, 6, 10] {
        let bag = WordBag::new(&words[..n as usize]);
        let r = method1(&bag, &lm).map_err(|e| e.to_string())?;
        let seeds = n * (n - 1) * (n - 2) * (n - 3);
        if r.seed_candidates != seeds || r.extension_iterations != n as usize - 4 {
            return Err(format!(
                "n={}: {} seeds (want {}), {} iterations (want {})",
                n,
                r.seed_candidates,
                seeds,
                r.extension_iterations,
                n - 4
            ));
        }
        parts.push(format!("n={}: {} seeds, {} iterations", n, seeds, n - 4));
    }
    Ok(parts.join("; "))
}

fn metric_identities() -> Outcome {
    let refs: Vec<Vec<String>> = read("references.txt")
        .lines()
        .map(|l| tokenize(l.split_once('\t').unwrap().1))
        .collect();
    let b = bleu(&refs, &refs).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_b = b;
    let mut worst_d = 100.0f64;
    for _ in 0..50 {
        let c: Vec<Vec<String>> = (0..rng.gen_range(1..6))
            .map(|_| (0..rng.gen_range(1..9)).map(|_| format!("w{}", rng.gen_range(0..6))).collect())
            .collect();
        worst_b = worst_b.min(bleu(&c, &c).unwrap());
        for s in &c {
            worst_d = worst_d.min(dist(&s.join(" "), &s.join(" ")));
        }
    }
    for s in &refs {
        worst_d = worst_d.min(dist(&s.join(" "), &s.join(" ")));
    }
    let abd = dist("abc", "abd");
    let detail = format!(
        "min BLEU(x,x) = {}, min DIST(x,x) = {}, DIST(abc,abd) = {:.4}",
        worst_b, worst_d, abd
    );
    if worst_b == 100.0 && worst_d == 100.0 && (abd - 66.67).abs() <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ud-realize"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{:?}: {}", args, String::from_utf8_lossy(&out.stderr)))
    }
}

fn pipeline_run(dir: &Path, tag: &str, jobs: &str) -> Result<Vec<Vec<u8>>, String> {
    let p = |name: &str| dir.join(format!("{}-{}", tag, name)).to_str().unwrap().to_string();
    let (lm, vocab, model, pred) = (p("lm.arpa"), p("vocab.txt"), p("model.bin"), p("pred.txt"));
    let corpus = toy("lm_corpus.txt");
    let data = toy("reinflection.tsv");
    let tb = toy("treebank.conllu");
    cli(&["train-lm", "--corpus", corpus.to_str().unwrap(), "--lm-out", &lm, "--vocab-out", &vocab])?;
    cli(&[
        "train-reinflector",
        "--data",
        data.to_str().unwrap(),
        "--out",
        &model,
        "--hidden",
        "32",
        "--epochs",
        "5",
        "--seed",
        "7",
    ])?;
    cli(&[
        "realize",
        "--conllu",
        tb.to_str().unwrap(),
        "--lm",
        &lm,
        "--reinflector",
        &model,
        "--out",
        &pred,
        "--jobs",
        jobs,
    ])?;
    [lm, vocab, model, pred]
        .iter()
        .map(|f| std::fs::read(f).map_err(|e| e.to_string()))
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let a = pipeline_run(dir.path(), "a", "1")?;
    let b = pipeline_run(dir.path(), "b", "1")?;
    let c = pipeline_run(dir.path(), "c", "8")?;
    let names = ["ARPA", "vocabulary", "checkpoint", "realization"];
    let mut diffs = Vec::new();
    for (i, name) in names.iter().enumerate() {
        if a[i] != b[i] || a[i] != c[i] {
            diffs.push(*name);
        }
    }
    if diffs.is_empty() {
        Ok(format!("3 runs (--jobs 1, 1, 8): {} identical output files", names.len()))
    } else {
        Err(format!("outputs differ: {:?}", diffs))
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("reinflection accuracy on synthetic English morphology", reinflection_accuracy),
        ("gradient matches central finite differences", gradient_check),
        ("LM normalization and ARPA round-trip", lm_normalization),
        ("exhaustive ordering equals brute-force argmax", ordering_oracle),
        ("end-to-end permutation invariant on toy treebank", permutation_invariant),
        ("chunk scheme reconstruction for n = 6", scheme_reconstruction),
        ("method 1 seed and LRW counting", method1_counting),
        ("metric identities", metric_identities),
        ("pipeline determinism across runs and --jobs", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("[PASS] {} ({:.1}s): {}", name, secs, d),
            Err(d) => {
                failed += 1;
                println!("[FAIL] {} ({:.1}s): {}", name, secs, d);
            }
        }
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
