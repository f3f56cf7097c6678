// temporary diagnostic: locate the worst finite-difference coordinates
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sequentinel::models::{forward, Architecture, ModelConfig, ModelVars, SequenceModel};
use sequentinel::tensor::{Tape, Tensor, Var};
use sequentinel::training;

fn toy_cfg(architecture: Architecture, seed: u64) -> ModelConfig {
    ModelConfig {
        architecture,
        vocab_size: 10,
        d_embed: 4,
        d_hidden: 6,
        n_lstm: 1,
        d_relu: 5,
        max_len: match architecture {
            Architecture::Cpols => None,
            _ => Some(24),
        },
        chunk_size: 8,
        conv_window: 4,
        conv_stride: 2,
        conv_channels: 4,
        seed,
    }
}

fn eval_loss(cfg: &ModelConfig, tensors: &[Tensor], events: &[u32]) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = tensors.iter().map(|t| tape.leaf(t)).collect();
    let mv = ModelVars::from_slice(cfg, &vars).unwrap();
    let out = forward(&mut tape, cfg, &mv, events).unwrap();
    let loss = training::tape_total_loss(&mut tape, &out, true, 1.0).unwrap();
    tape.value(loss)[0]
}

fn main() {
    let eps = 1e-5;
    for (arch, seed) in [
        (Architecture::Mpl, 0u64),
        (Architecture::Cpols, 2),
        (Architecture::Aoll, 2),
        (Architecture::Dsl, 3),
    ] {
        let cfg = toy_cfg(arch, seed);
        let model = SequenceModel::new(cfg.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let events: Vec<u32> = (0..11).map(|_| rng.gen_range(0..8)).collect();
        let names: Vec<String> = model.params.named().iter().map(|(n, _)| n.clone()).collect();
        let mut tensors: Vec<Tensor> = model.params.tensors().into_iter().cloned().collect();

        // analytic
        let mut tape = Tape::new();
        let vars: Vec<Var> = tensors.iter().map(|t| tape.leaf(t)).collect();
        let mv = ModelVars::from_slice(&cfg, &vars).unwrap();
        let out = forward(&mut tape, &cfg, &mv, &events).unwrap();
        let loss = training::tape_total_loss(&mut tape, &out, true, 1.0).unwrap();
        tape.backward(loss).unwrap();
        let analytic: Vec<Vec<f64>> = vars
            .iter()
            .zip(&tensors)
            .map(|(&v, t)| {
                tape.grad(v)
                    .map(|g| g.to_vec())
                    .unwrap_or_else(|| vec![0.0; t.numel()])
            })
            .collect();
        drop(tape);

        let mut worst: Vec<(f64, String, usize, f64, f64)> = Vec::new();
        for pi in 0..tensors.len() {
            for ci in 0..tensors[pi].numel() {
                let orig = tensors[pi].data()[ci];
                tensors[pi].data_mut()[ci] = orig + eps;
                let fp = eval_loss(&cfg, &tensors, &events);
                tensors[pi].data_mut()[ci] = orig - eps;
                let fm = eval_loss(&cfg, &tensors, &events);
                tensors[pi].data_mut()[ci] = orig;
                let n = (fp - fm) / (2.0 * eps);
                let a = analytic[pi][ci];
                let err = (a - n).abs() / f64::max(1e-8, a.abs() + n.abs());
                worst.push((err, names[pi].clone(), ci, a, n));
            }
        }
        worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        println!("== {arch:?} seed {seed}");
        for (err, name, ci, a, n) in worst.iter().take(5) {
            println!("  err {err:.3e}  {name}[{ci}]  analytic {a:.6e}  numeric {n:.6e}");
        }
    }
}
