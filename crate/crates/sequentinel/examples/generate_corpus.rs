//! Generate a synthetic corpus with a late-planted motif and write it to
//! disk alongside its vocabulary.
//!
//! Malicious sequences contain three rare events in a fixed order near the
//! end of the sequence; benign sequences draw from the same background but
//! never contain those events in that order. The files land in
//! `./corpus_out/`.
//!
//! Run with: cargo run --example generate_corpus

use sequentinel::data::{
    self, contains_ordered_motif, default_motif, Background, GeneratorConfig, Placement,
    Vocabulary,
};

fn main() {
    let vocab = Vocabulary::synthetic(data::DEFAULT_EVENT_COUNT);
    let gc = GeneratorConfig {
        n: 500,
        malware_fraction: 0.75,
        min_len: 512,
        max_len: 2048,
        motif: default_motif(&vocab, Placement::Late),
        background: Background::Zipf,
        seed: 42,
    };
    let corpus = data::generate_synthetic_corpus(&gc, &vocab).unwrap();

    let out = std::path::Path::new("corpus_out");
    std::fs::create_dir_all(out).unwrap();
    data::save_corpus(&out.join("corpus.jsonl"), &corpus, &vocab).unwrap();
    vocab.save(&out.join("vocabulary.txt")).unwrap();

    let malicious = corpus.iter().filter(|s| s.label).count();
    println!(
        "wrote {} sequences ({malicious} malicious) to {}",
        corpus.len(),
        out.display()
    );
    let motif_names: Vec<&str> = gc
        .motif
        .motif
        .iter()
        .map(|&id| vocab.name(id).unwrap())
        .collect();
    println!("planted motif: {}", motif_names.join(" .. "));

    // sanity: the ordered motif separates the classes exactly
    let leaks = corpus
        .iter()
        .filter(|s| contains_ordered_motif(&s.events, &gc.motif.motif) != s.label)
        .count();
    println!("sequences where motif presence disagrees with label: {leaks}");
}
