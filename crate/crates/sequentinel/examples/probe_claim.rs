// temporary diagnostic: isolate why one seed's CPoLS run fails to
// generalize (corpus draw vs init draw), and test sturdier settings
use sequentinel::data::{
    generate_synthetic_corpus, Background, GeneratorConfig, MotifSpec, Placement, Vocabulary,
};
use sequentinel::eval::{accuracy, roc_curve, score_set, tpr_at_fpr};
use sequentinel::models::{Architecture, ModelConfig, SequenceModel};
use sequentinel::training::{train, TrainConfig};
use std::time::Instant;

fn main() {
    let started = Instant::now();
    let vocab = Vocabulary::synthetic(156);
    let corpus_for = |seed: u64| {
        let gc = GeneratorConfig {
            n: 5000,
            malware_fraction: 0.5,
            min_len: 1024,
            max_len: 4096,
            motif: MotifSpec {
                motif: vec![10, 11, 12],
                min_gap: 0,
                max_gap: 1,
                placement: Placement::Late,
            },
            background: Background::Zipf,
            seed,
        };
        generate_synthetic_corpus(&gc, &vocab).unwrap()
    };

    // (corpus seed, init seed, epochs, batch, lr)
    let cases = [
        (2u64, 1u64, 5usize, 32usize, 1e-3f64),
        (2, 3, 5, 32, 1e-3),
        (5, 5, 5, 32, 1e-3),
        (1, 1, 5, 32, 1e-3),
    ];
    for (corpus_seed, init_seed, epochs, batch, lr) in cases {
        let corpus = corpus_for(corpus_seed);
        let (train_set, test_set) = corpus.split_at(4000);
        let cfg = ModelConfig {
            architecture: Architecture::Cpols,
            vocab_size: vocab.size(),
            d_embed: 16,
            d_hidden: 64,
            n_lstm: 1,
            d_relu: 16,
            max_len: None,
            chunk_size: 64,
            conv_window: 10,
            conv_stride: 5,
            conv_channels: 32,
            seed: init_seed,
        };
        let t = Instant::now();
        let mut model = SequenceModel::new(cfg).unwrap();
        let tc = TrainConfig {
            epochs,
            batch_size: batch,
            learning_rate: lr,
            ..TrainConfig::default()
        };
        let report = train(&mut model, &tc, train_set, &[]).unwrap();
        let scored = score_set(&model, test_set).unwrap();
        let curve = roc_curve(&scored).unwrap();
        println!(
            "corpus {corpus_seed} init {init_seed} e={epochs} b={batch} lr={lr}: \
             train_acc {:.3} test_acc {:.3} auc {:.4} tpr@1% {:.3}  ({:.0}s)",
            report.train_accuracy,
            accuracy(&scored, 0.5).unwrap(),
            curve.auc,
            tpr_at_fpr(&curve, 0.01),
            t.elapsed().as_secs_f64()
        );
    }
    println!("total {:.0}s", started.elapsed().as_secs_f64());
}
