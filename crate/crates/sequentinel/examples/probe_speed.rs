// temporary diagnostic: per-sequence forward/backward cost at desk dims
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sequentinel::data::LabeledSequence;
use sequentinel::models::{Architecture, ModelConfig, SequenceModel};
use sequentinel::training::{train, TrainConfig};
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, arch, max_len, len) in [
        ("mpl-256 (len 2560)", Architecture::Mpl, Some(256), 2560usize),
        ("cpols s=64 (len 2560)", Architecture::Cpols, None, 2560),
        ("cpols s=64 (len 4096)", Architecture::Cpols, None, 4096),
        ("mpl-256 (len 150)", Architecture::Mpl, Some(256), 150),
        ("dsl-256 (len 150)", Architecture::Dsl, Some(256), 150),
    ] {
        let cfg = ModelConfig {
            architecture: arch,
            vocab_size: 158,
            d_embed: 16,
            d_hidden: 64,
            n_lstm: 1,
            d_relu: 16,
            max_len,
            chunk_size: 64,
            conv_window: 10,
            conv_stride: 5,
            conv_channels: 16,
            seed: 7,
        };
        let mut model = SequenceModel::new(cfg).unwrap();
        let seqs: Vec<LabeledSequence> = (0..32)
            .map(|i| LabeledSequence {
                id: format!("s{i}"),
                label: i % 2 == 0,
                events: (0..len).map(|_| rng.gen_range(0..156)).collect(),
            })
            .collect();
        let tc = TrainConfig {
            epochs: 1,
            batch_size: 32,
            ..TrainConfig::default()
        };
        let t = Instant::now();
        train(&mut model, &tc, &seqs, &[]).unwrap();
        let per_pass = t.elapsed().as_secs_f64() / 32.0;
        println!("{name}: {:.2} ms per train pass", per_pass * 1e3);

        let t = Instant::now();
        for s in seqs.iter().take(8) {
            model.score(&s.events).unwrap();
        }
        println!("    {:.2} ms per inference", t.elapsed().as_secs_f64() / 8.0 * 1e3);
    }
}
