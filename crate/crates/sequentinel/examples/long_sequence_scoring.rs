//! Chunked scoring of very long sequences. A CPoLS model trained on
//! moderate lengths scores a 100,000-event sequence without truncating a
//! single event, because the chunked convolution front end reduces any
//! length to `ceil(len / chunk_size)` LSTM steps.
//!
//! Run with: cargo run --release --example long_sequence_scoring

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sequentinel::data::{
    default_motif, generate_synthetic_corpus, Background, GeneratorConfig, Placement, Vocabulary,
};
use sequentinel::models::{Architecture, ModelConfig, SequenceModel};
use sequentinel::training::{train, TrainConfig};
use std::time::Instant;

fn main() {
    let seed = 5u64;
    let vocab = Vocabulary::synthetic(64);
    let motif = default_motif(&vocab, Placement::Uniform);
    let gc = GeneratorConfig {
        n: 400,
        malware_fraction: 0.5,
        min_len: 256,
        max_len: 1024,
        motif: motif.clone(),
        background: Background::Zipf,
        seed,
    };
    let corpus = generate_synthetic_corpus(&gc, &vocab).unwrap();

    let mut cfg = ModelConfig::desk(Architecture::Cpols, vocab.size());
    cfg.d_hidden = 32;
    cfg.seed = seed;
    let mut model = SequenceModel::new(cfg).unwrap();
    let tc = TrainConfig {
        epochs: 4,
        batch_size: 32,
        learning_rate: 3e-3,
        ..TrainConfig::default()
    };
    train(&mut model, &tc, &corpus, &[]).unwrap();

    // a 100,000-event file: benign background with the motif buried at the
    // very end, far beyond any fixed-length model's window
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut events: Vec<u32> = (0..100_000)
        .map(|_| rng.gen_range(0..vocab.event_count() as u32 - 3))
        .collect();
    let n = events.len();
    let benign_score = {
        let t = Instant::now();
        let p = model.score(&events).unwrap();
        println!(
            "benign 100k-event sequence: p_m {:.4} ({:.0} ms)",
            p,
            t.elapsed().as_secs_f64() * 1e3
        );
        p
    };
    events[n - 9] = motif.motif[0];
    events[n - 6] = motif.motif[1];
    events[n - 2] = motif.motif[2];
    let t = Instant::now();
    let p = model.score(&events).unwrap();
    println!(
        "same sequence with motif planted in the last 10 events: p_m {:.4} ({:.0} ms)",
        p,
        t.elapsed().as_secs_f64() * 1e3
    );
    println!("score shift: {:+.4}", p - benign_score);
}
