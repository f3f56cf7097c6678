//! Checkpoint round trip: train briefly, save the model with its
//! vocabulary, reload, and score a raw event-name sequence the way the
//! `predict` subcommand does.
//!
//! Run with: cargo run --release --example checkpoint_predict

use sequentinel::checkpoint;
use sequentinel::data::{
    default_motif, generate_synthetic_corpus, Background, GeneratorConfig, Placement, Vocabulary,
};
use sequentinel::models::{Architecture, ModelConfig, SequenceModel};
use sequentinel::training::{train, TrainConfig};

fn main() {
    let vocab = Vocabulary::synthetic(64);
    let gc = GeneratorConfig {
        n: 300,
        malware_fraction: 0.5,
        min_len: 50,
        max_len: 150,
        motif: default_motif(&vocab, Placement::Uniform),
        background: Background::Zipf,
        seed: 3,
    };
    let corpus = generate_synthetic_corpus(&gc, &vocab).unwrap();

    let mut cfg = ModelConfig::desk(Architecture::Mpl, vocab.size());
    cfg.d_hidden = 32;
    cfg.seed = 3;
    let mut model = SequenceModel::new(cfg).unwrap();
    let tc = TrainConfig {
        epochs: 3,
        batch_size: 32,
        learning_rate: 3e-3,
        ..TrainConfig::default()
    };
    train(&mut model, &tc, &corpus, &[]).unwrap();

    let dir = std::env::temp_dir().join("sequentinel_example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mpl.ckpt");
    checkpoint::save(&path, &model, &vocab).unwrap();
    println!("saved {}", path.display());

    let (loaded, loaded_vocab) = checkpoint::load(&path).unwrap();

    // score raw event names, unknown ones fall back to <UNK>
    let names = [
        "createfile",
        "virtualalloc",
        "virtualalloc",
        "getmodulehandle",
        "getmodulefilename",
        "some_event_nobody_has_seen",
    ];
    let events: Vec<u32> = names.iter().map(|n| loaded_vocab.encode(n)).collect();
    let p = loaded.score(&events).unwrap();
    println!("p_m for {} events: {p:.6}", names.len());
    println!(
        "reloaded model agrees with original: {}",
        loaded.score(&events).unwrap() == model.score(&events).unwrap()
    );
}
