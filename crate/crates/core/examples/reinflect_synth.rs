//! Trains the reinflector on rule-generated English morphology and reports
//! held-out exact match.
//!
//! cargo run --release -p ud-realize --example reinflect_synth [lemmas] [epochs]

use std::time::Instant;

use ud_realize::reinflect::{exact_match, synth, train, ModelConfig, Seq2SeqModel, TrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(700);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let split = synth::english_morphology(n, 0.1, 2018);
    println!("train {} held-out {}", split.train.len(), split.held_out.len());
    let model = Seq2SeqModel::for_data(&split.train, ModelConfig::default(), 1);
    let cfg = TrainConfig { epochs, ..TrainConfig::default() };
    let start = Instant::now();
    let out = train(model, &split.train, &cfg).expect("training failed");
    println!("trained in {:.1}s", start.elapsed().as_secs_f64());
    for (i, l) in out.loss_trace.iter().enumerate() {
        println!("epoch {:>2} loss {:.5}", i + 1, l);
    }
    let acc = exact_match(&out.model, &split.held_out).unwrap();
    println!("held-out exact match {:.4}", acc);
    for ex in split.held_out.iter().take(12) {
        println!("{} {} -> {} (gold {})", ex.lemma, ex.tag, out.model.predict(&ex.lemma, &ex.tag).unwrap(), ex.target);
    }
}
