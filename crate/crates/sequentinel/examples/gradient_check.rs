//! End-to-end gradient validation for every architecture at toy
//! dimensions: the analytic gradient of the total loss with respect to
//! every parameter is compared against central finite differences.
//!
//! Run with: cargo run --example gradient_check

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sequentinel::models::{forward, Architecture, ModelConfig, ModelVars, SequenceModel};
use sequentinel::tensor::{grad_check, Tensor};
use sequentinel::training;

fn main() {
    for arch in [
        Architecture::Dsl,
        Architecture::Mpl,
        Architecture::Aoll,
        Architecture::Cpols,
    ] {
        let cfg = ModelConfig {
            architecture: arch,
            vocab_size: 10,
            d_embed: 4,
            d_hidden: 6,
            n_lstm: 1,
            d_relu: 5,
            max_len: match arch {
                Architecture::Cpols => None,
                _ => Some(24),
            },
            chunk_size: 8,
            conv_window: 4,
            conv_stride: 2,
            conv_channels: 4,
            seed: 1,
        };
        let model = SequenceModel::new(cfg.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        let events: Vec<u32> = (0..12).map(|_| rng.gen_range(0..8)).collect();

        let mut tensors: Vec<Tensor> = model.params.tensors().into_iter().cloned().collect();
        let n_params: usize = tensors.iter().map(|t| t.numel()).sum();
        let err = grad_check(&mut tensors, 1e-5, |tape, vars| {
            let mv = ModelVars::from_slice(&cfg, vars)?;
            let out = forward(tape, &cfg, &mv, &events)?;
            training::tape_total_loss(tape, &out, true, 1.0)
        })
        .unwrap();
        println!(
            "{:<6} {n_params:>4} parameters: max relative error {err:.3e}",
            arch.name()
        );
    }
}
