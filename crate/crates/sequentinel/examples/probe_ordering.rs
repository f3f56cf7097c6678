// temporary diagnostic: architecture ordering on a visible-motif corpus
use sequentinel::data::{
    generate_synthetic_corpus, Background, GeneratorConfig, MotifSpec, Placement, Vocabulary,
};
use sequentinel::eval::{accuracy, score_set};
use sequentinel::models::{Architecture, ModelConfig, SequenceModel};
use sequentinel::training::{train, TrainConfig};
use std::time::Instant;

fn main() {
    let started = Instant::now();
    let vocab = Vocabulary::synthetic(156);
    for (min_gap, max_gap) in [(5usize, 20usize), (0, 1)] {
        for seed in [1u64, 2, 3] {
            let gc = GeneratorConfig {
                n: 1500,
                malware_fraction: 0.5,
                min_len: 50,
                max_len: 256,
                motif: MotifSpec {
                    motif: vec![10, 11, 12],
                    min_gap,
                    max_gap,
                    placement: Placement::Uniform,
                },
                background: Background::Zipf,
                seed: seed + 60,
            };
            let corpus = generate_synthetic_corpus(&gc, &vocab).unwrap();
            let (train_set, test_set) = corpus.split_at(1050);
            let mut line = format!("gaps {min_gap}-{max_gap} seed {seed}:");
            for (arch, epochs, lr) in [
                (Architecture::Dsl, 5usize, 3e-3f64),
                (Architecture::Mpl, 5, 3e-3),
                (Architecture::Cpols, 30, 3e-3),
            ] {
                let cfg = ModelConfig {
                    architecture: arch,
                    vocab_size: vocab.size(),
                    d_embed: 16,
                    d_hidden: 64,
                    n_lstm: 1,
                    d_relu: 16,
                    max_len: match arch {
                        Architecture::Cpols => None,
                        _ => Some(256),
                    },
                    chunk_size: 30,
                    conv_window: 10,
                    conv_stride: 5,
                    conv_channels: 32,
                    seed,
                };
                let t = Instant::now();
                let mut model = SequenceModel::new(cfg).unwrap();
                let tc = TrainConfig {
                    epochs,
                    batch_size: 32,
                    learning_rate: lr,
                    ..TrainConfig::default()
                };
                train(&mut model, &tc, train_set, &[]).unwrap();
                let scored = score_set(&model, test_set).unwrap();
                line.push_str(&format!(
                    "  {}@{epochs} {:.4} ({:.0}s)",
                    arch.name(),
                    accuracy(&scored, 0.5).unwrap(),
                    t.elapsed().as_secs_f64()
                ));
            }
            println!("{line}");
        }
    }
    println!("total {:.0}s", started.elapsed().as_secs_f64());
}
