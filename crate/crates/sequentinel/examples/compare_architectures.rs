//! Train all four architectures on the same corpus and print a comparison
//! table. With a motif placed uniformly in short sequences every model can
//! see the signal; the interesting differences are in how well each binds
//! it.
//!
//! Run with: cargo run --release --example compare_architectures

use sequentinel::data::{
    default_motif, generate_synthetic_corpus, split_corpus, Background, GeneratorConfig,
    Placement, Vocabulary,
};
use sequentinel::eval::{accuracy, roc_curve, score_set, tpr_at_fpr};
use sequentinel::models::{Architecture, ModelConfig, SequenceModel};
use sequentinel::training::{train, TrainConfig};

fn main() {
    let seed = 11u64;
    let vocab = Vocabulary::synthetic(64);
    let gc = GeneratorConfig {
        n: 800,
        malware_fraction: 0.5,
        min_len: 50,
        max_len: 256,
        motif: default_motif(&vocab, Placement::Uniform),
        background: Background::Zipf,
        seed,
    };
    let corpus = generate_synthetic_corpus(&gc, &vocab).unwrap();
    let split = split_corpus(corpus, [0.75, 0.05, 0.2], seed).unwrap();

    println!("{:<8}{:>10}{:>10}{:>12}", "model", "accuracy", "auc", "tpr@1%fpr");
    for arch in [
        Architecture::Dsl,
        Architecture::Mpl,
        Architecture::Aoll,
        Architecture::Cpols,
    ] {
        let mut cfg = ModelConfig::desk(arch, vocab.size());
        cfg.d_hidden = 32;
        cfg.seed = seed;
        let mut model = SequenceModel::new(cfg).unwrap();
        let tc = TrainConfig {
            epochs: 5,
            batch_size: 32,
            learning_rate: 3e-3,
            ..TrainConfig::default()
        };
        train(&mut model, &tc, &split.train, &split.validation).unwrap();
        let scored = score_set(&model, &split.test).unwrap();
        let curve = roc_curve(&scored).unwrap();
        println!(
            "{:<8}{:>10.4}{:>10.4}{:>12.4}",
            arch.name(),
            accuracy(&scored, 0.5).unwrap(),
            curve.auc,
            tpr_at_fpr(&curve, 0.01)
        );
    }
}
