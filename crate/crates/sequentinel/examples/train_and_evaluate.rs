//! End-to-end run at small scale: generate a corpus, filter and split it,
//! train an MPL classifier, and report accuracy, AUC and TPR at 1% FPR on
//! the held-out test split.
//!
//! Run with: cargo run --release --example train_and_evaluate

use sequentinel::data::{
    default_motif, filter_corpus, generate_synthetic_corpus, split_corpus, Background,
    GeneratorConfig, Placement, Vocabulary,
};
use sequentinel::eval::{accuracy, roc_curve, score_set, tpr_at_fpr};
use sequentinel::models::{Architecture, ModelConfig, SequenceModel};
use sequentinel::training::{train, TrainConfig};

fn main() {
    let seed = 7u64;
    let vocab = Vocabulary::synthetic(64);
    let gc = GeneratorConfig {
        n: 600,
        malware_fraction: 0.5,
        min_len: 50,
        max_len: 200,
        motif: default_motif(&vocab, Placement::Uniform),
        background: Background::Zipf,
        seed,
    };
    let corpus = filter_corpus(generate_synthetic_corpus(&gc, &vocab).unwrap());
    let split = split_corpus(corpus, [0.7, 0.1, 0.2], seed).unwrap();
    println!(
        "corpus: {} train / {} validation / {} test",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );

    let mut cfg = ModelConfig::desk(Architecture::Mpl, vocab.size());
    cfg.d_hidden = 32;
    cfg.seed = seed;
    let mut model = SequenceModel::new(cfg).unwrap();
    let tc = TrainConfig {
        epochs: 5,
        batch_size: 32,
        learning_rate: 3e-3,
        ..TrainConfig::default()
    };
    let report = train(&mut model, &tc, &split.train, &split.validation).unwrap();
    for e in &report.epochs {
        println!(
            "epoch {} train_loss {:.4} val_loss {:.4} val_acc {:.4}",
            e.epoch,
            e.train_loss,
            e.val_loss.unwrap(),
            e.val_accuracy.unwrap()
        );
    }

    let scored = score_set(&model, &split.test).unwrap();
    let curve = roc_curve(&scored).unwrap();
    println!(
        "test: accuracy {:.4}  auc {:.4}  tpr@1%fpr {:.4}",
        accuracy(&scored, 0.5).unwrap(),
        curve.auc,
        tpr_at_fpr(&curve, 0.01)
    );
}
