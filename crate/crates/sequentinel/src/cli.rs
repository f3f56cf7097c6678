//! Command-line interface: `generate`, `train`, `eval`, `predict`.
//!
//! Every run is fully determined by its flags, the single `--seed`, and the
//! input file bytes; the resolved configuration is echoed to the output
//! directory as `config.json`. Exit codes: 0 success, 2 usage error,
//! 1 runtime error.

use crate::checkpoint;
use crate::data::{
    self, Background, GeneratorConfig, MotifSpec, Placement, Vocabulary,
};
use crate::error::{Error, Result};
use crate::eval::{self, ModelEval};
use crate::models::{Architecture, ModelConfig, SequenceModel};
use crate::training::{self, TrainConfig};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "sequentinel",
    version,
    about = "Sequence classifiers for malware detection over emulated file-event logs"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic planted-motif corpus and its vocabulary.
    Generate(GenerateArgs),
    /// Train a model on a corpus file and write a checkpoint plus metrics.
    Train(Box<TrainArgs>),
    /// Score a test corpus with a checkpoint and emit accuracy/ROC files.
    Eval(EvalArgs),
    /// Score a single event sequence with a checkpoint.
    Predict(PredictArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for corpus.jsonl, vocabulary.txt and config.json.
    #[arg(long)]
    out: PathBuf,
    /// Number of sequences.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Fraction of malicious sequences.
    #[arg(long, default_value_t = 0.75)]
    fraction: f64,
    /// Shortest sequence length.
    #[arg(long, default_value_t = 50)]
    min_len: usize,
    /// Longest sequence length.
    #[arg(long, default_value_t = 300)]
    max_len: usize,
    /// Where the motif lands in malicious sequences: early, late, uniform.
    #[arg(long, default_value = "uniform")]
    placement: String,
    /// Comma-separated motif events (names or ids); defaults to three rare
    /// events in order.
    #[arg(long)]
    motif: Option<String>,
    /// Minimum gap between consecutive motif events.
    #[arg(long, default_value_t = 0)]
    min_gap: usize,
    /// Maximum gap between consecutive motif events.
    #[arg(long, default_value_t = 2)]
    max_gap: usize,
    /// Background event distribution: zipf or uniform.
    #[arg(long, default_value = "zipf")]
    background: String,
    /// Number of distinct events in the vocabulary.
    #[arg(long, default_value_t = data::DEFAULT_EVENT_COUNT)]
    events: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus file (line-delimited JSON records).
    #[arg(long)]
    corpus: PathBuf,
    /// Vocabulary file matching the corpus.
    #[arg(long)]
    vocab: PathBuf,
    /// Output directory for checkpoint.ckpt, metrics.tsv and config.json.
    #[arg(long)]
    out: PathBuf,
    /// Architecture: dsl, mpl, aoll, cpols (default mpl).
    #[arg(long)]
    arch: Option<String>,
    /// Base hyperparameter preset: desk or paper.
    #[arg(long, default_value = "desk")]
    preset: String,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_lstm: Option<usize>,
    #[arg(long)]
    d_embed: Option<usize>,
    #[arg(long)]
    d_hidden: Option<usize>,
    #[arg(long)]
    d_relu: Option<usize>,
    /// Head-first truncation length for fixed-length models.
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    chunk_size: Option<usize>,
    #[arg(long)]
    conv_window: Option<usize>,
    #[arg(long)]
    conv_stride: Option<usize>,
    #[arg(long)]
    conv_channels: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Weight of the auxiliary next-event loss (aoll only).
    #[arg(long)]
    lambda_aux: Option<f64>,
    /// Global-norm gradient clip; 0 disables clipping.
    #[arg(long)]
    clip_norm: Option<f64>,
    /// Train/validation/test ratios.
    #[arg(long, default_value = "0.7,0.1,0.2")]
    ratios: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Corpus file to score.
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for metrics.tsv, roc_points.tsv and roc.svg.
    #[arg(long)]
    out: PathBuf,
    /// Optional vocabulary file; must match the checkpoint's vocabulary.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Cap on scoring threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Comma-separated event names.
    #[arg(long)]
    events: Option<String>,
    /// File with one event name per line.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Print a MALICIOUS/BENIGN verdict at this probability threshold.
    #[arg(long)]
    threshold: Option<f64>,
}

/// Parses the process arguments and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(Error::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(*args),
        Command::Eval(args) => cmd_eval(args),
        Command::Predict(args) => cmd_predict(args),
    }
}

// ── generate ────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct GenerateEcho<'a> {
    command: &'a str,
    events: usize,
    generator: &'a GeneratorConfig,
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let placement: Placement = args.placement.parse().map_err(usage)?;
    let background: Background = args.background.parse().map_err(usage)?;
    let vocab = Vocabulary::synthetic(args.events);
    let motif = match &args.motif {
        Some(spec) => MotifSpec {
            motif: parse_motif(spec, &vocab)?,
            min_gap: args.min_gap,
            max_gap: args.max_gap,
            placement,
        },
        None => {
            let mut m = data::default_motif(&vocab, placement);
            m.min_gap = args.min_gap;
            m.max_gap = args.max_gap;
            m
        }
    };
    let gc = GeneratorConfig {
        n: args.n,
        malware_fraction: args.fraction,
        min_len: args.min_len,
        max_len: args.max_len,
        motif,
        background,
        seed: args.seed,
    };
    gc.validate(vocab.event_count()).map_err(usage)?;

    let corpus = data::generate_synthetic_corpus(&gc, &vocab)?;
    std::fs::create_dir_all(&args.out)?;
    data::save_corpus(&args.out.join("corpus.jsonl"), &corpus, &vocab)?;
    vocab.save(&args.out.join("vocabulary.txt"))?;
    write_config_echo(
        &args.out,
        &GenerateEcho {
            command: "generate",
            events: args.events,
            generator: &gc,
        },
    )?;

    let malicious = corpus.iter().filter(|s| s.label).count();
    let (min_len, max_len) = corpus.iter().fold((usize::MAX, 0), |(lo, hi), s| {
        (lo.min(s.events.len()), hi.max(s.events.len()))
    });
    println!(
        "wrote {} sequences ({} malicious, {} benign), lengths {}..{}, to {}",
        corpus.len(),
        malicious,
        corpus.len() - malicious,
        min_len,
        max_len,
        args.out.display()
    );
    Ok(())
}

fn parse_motif(spec: &str, vocab: &Vocabulary) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if vocab.contains(part) {
            out.push(vocab.encode(part));
        } else if let Ok(id) = part.parse::<u32>() {
            if (id as usize) < vocab.event_count() {
                out.push(id);
            } else {
                return Err(Error::Usage(format!(
                    "motif id {id} outside the {} events",
                    vocab.event_count()
                )));
            }
        } else {
            return Err(Error::Usage(format!("unknown motif event '{part}'")));
        }
    }
    if out.is_empty() {
        return Err(Error::Usage("motif must name at least one event".into()));
    }
    Ok(out)
}

// ── train ───────────────────────────────────────────────────────────────

/// Optional overrides loadable from `--config`; flags win over the file.
#[derive(Default, Deserialize)]
struct FileConfig {
    #[serde(default)]
    model: PartialModel,
    #[serde(default)]
    training: PartialTrain,
}

#[derive(Default, Deserialize)]
struct PartialModel {
    architecture: Option<Architecture>,
    n_lstm: Option<usize>,
    d_embed: Option<usize>,
    d_hidden: Option<usize>,
    d_relu: Option<usize>,
    max_len: Option<usize>,
    chunk_size: Option<usize>,
    conv_window: Option<usize>,
    conv_stride: Option<usize>,
    conv_channels: Option<usize>,
}

#[derive(Default, Deserialize)]
struct PartialTrain {
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    aux_weight: Option<f64>,
    clip_norm: Option<f64>,
}

#[derive(Serialize)]
struct TrainEcho<'a> {
    command: &'a str,
    corpus: String,
    vocab: String,
    ratios: [f64; 3],
    model: &'a ModelConfig,
    training: &'a TrainConfig,
}

fn resolve_train_config(
    args: &TrainArgs,
    vocab_size: usize,
) -> Result<(ModelConfig, TrainConfig, [f64; 3])> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Usage(format!("bad config file: {e}")))?
        }
        None => FileConfig::default(),
    };

    let arch: Architecture = match (&args.arch, file.model.architecture) {
        (Some(flag), _) => flag.parse().map_err(usage)?,
        (None, Some(from_file)) => from_file,
        (None, None) => Architecture::Mpl,
    };
    let mut cfg = match args.preset.as_str() {
        "desk" => ModelConfig::desk(arch, vocab_size),
        "paper" => ModelConfig::paper(arch, vocab_size),
        other => return Err(Error::Usage(format!("unknown preset '{other}'"))),
    };
    cfg.seed = args.seed;

    macro_rules! pick {
        ($field:ident) => {
            if let Some(v) = args.$field.or(file.model.$field) {
                cfg.$field = v;
            }
        };
    }
    pick!(n_lstm);
    pick!(d_embed);
    pick!(d_hidden);
    pick!(d_relu);
    pick!(chunk_size);
    pick!(conv_window);
    pick!(conv_stride);
    pick!(conv_channels);
    if let Some(m) = args.max_len.or(file.model.max_len) {
        cfg.max_len = Some(m);
    }

    let mut tc = TrainConfig::default();
    if args.preset == "desk" {
        tc.epochs = 5;
        tc.batch_size = 32;
    }
    if let Some(v) = args.epochs.or(file.training.epochs) {
        tc.epochs = v;
    }
    if let Some(v) = args.batch_size.or(file.training.batch_size) {
        tc.batch_size = v;
    }
    if let Some(v) = args.lr.or(file.training.learning_rate) {
        tc.learning_rate = v;
    }
    if let Some(v) = args.lambda_aux.or(file.training.aux_weight) {
        tc.aux_weight = v;
    }
    if let Some(v) = args.clip_norm.or(file.training.clip_norm) {
        tc.clip_norm = if v == 0.0 { None } else { Some(v) };
    }

    let ratios = parse_ratios(&args.ratios)?;
    cfg.validate().map_err(usage)?;
    Ok((cfg, tc, ratios))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let vocab = Vocabulary::load(&args.vocab)?;
    let (cfg, tc, ratios) = resolve_train_config(&args, vocab.size())?;

    let corpus = data::load_corpus(&args.corpus, &vocab)?;
    let filtered = data::filter_corpus(corpus);
    if filtered.is_empty() {
        return Err(Error::contract(
            "no sequences survived corpus filtering; nothing to train on",
        ));
    }
    let split = data::split_corpus(filtered, ratios, args.seed)?;
    println!(
        "training {} on {} sequences (validation {}, test {})",
        cfg.architecture.name(),
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );

    let mut model = SequenceModel::new(cfg.clone())?;
    let report = training::train(&mut model, &tc, &split.train, &split.validation)?;
    for e in &report.epochs {
        match (e.val_loss, e.val_accuracy) {
            (Some(vl), Some(va)) => println!(
                "epoch {}/{} train_loss {:.4} val_loss {:.4} val_acc {:.4}",
                e.epoch, tc.epochs, e.train_loss, vl, va
            ),
            _ => println!("epoch {}/{} train_loss {:.4}", e.epoch, tc.epochs, e.train_loss),
        }
    }

    std::fs::create_dir_all(&args.out)?;
    checkpoint::save(&args.out.join("checkpoint.ckpt"), &model, &vocab)?;
    training::write_metrics(&args.out.join("metrics.tsv"), &report)?;
    write_config_echo(
        &args.out,
        &TrainEcho {
            command: "train",
            corpus: args.corpus.display().to_string(),
            vocab: args.vocab.display().to_string(),
            ratios,
            model: &cfg,
            training: &tc,
        },
    )?;
    println!(
        "retained {} checkpoint, train accuracy {:.4}, wrote {}",
        match report.best_epoch {
            Some(e) => format!("epoch {e}"),
            None => "final".into(),
        },
        report.train_accuracy,
        args.out.display()
    );
    Ok(())
}

fn parse_ratios(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Usage(format!("bad ratios '{s}': {e}")))?;
    if parts.len() != 3 {
        return Err(Error::Usage(format!(
            "ratios need exactly three values, got {}",
            parts.len()
        )));
    }
    Ok([parts[0], parts[1], parts[2]])
}

// ── eval ────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct EvalEcho<'a> {
    command: &'a str,
    checkpoint: String,
    corpus: String,
    threshold: f64,
    model: &'a ModelConfig,
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let (model, vocab) = checkpoint::load(&args.checkpoint)?;
    if let Some(vocab_path) = &args.vocab {
        let corpus_vocab = Vocabulary::load(vocab_path)?;
        if corpus_vocab != vocab {
            return Err(Error::Checkpoint(format!(
                "vocabulary {} is incompatible with the checkpoint's vocabulary",
                vocab_path.display()
            )));
        }
    }
    let corpus = data::load_corpus(&args.corpus, &vocab)?;
    if corpus.is_empty() {
        return Err(Error::contract("eval: empty corpus"));
    }

    let scored = match args.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| eval::score_set(&model, &corpus))?
        }
        None => eval::score_set(&model, &corpus)?,
    };

    let accuracy = eval::accuracy(&scored, 0.5)?;
    let curve = match eval::roc_curve(&scored) {
        Ok(c) => Some(c),
        Err(e) => {
            eprintln!("warning: no ROC curve: {e}");
            None
        }
    };

    println!("accuracy {accuracy:.4}");
    if let Some(c) = &curve {
        println!("auc {:.4}", c.auc);
        println!("tpr@1%fpr {:.4}", eval::tpr_at_fpr(c, 0.01));
    }

    let evals = vec![ModelEval {
        name: model.cfg.architecture.name().to_string(),
        accuracy,
        curve,
    }];
    let paths = eval::emit_results(&args.out, &evals)?;
    write_config_echo(
        &args.out,
        &EvalEcho {
            command: "eval",
            checkpoint: args.checkpoint.display().to_string(),
            corpus: args.corpus.display().to_string(),
            threshold: 0.5,
            model: &model.cfg,
        },
    )?;
    println!("wrote {}", paths.metrics.display());
    Ok(())
}

// ── predict ─────────────────────────────────────────────────────────────

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let (model, vocab) = checkpoint::load(&args.checkpoint)?;
    let names: Vec<String> = match (&args.events, &args.input) {
        (Some(_), Some(_)) => {
            return Err(Error::Usage(
                "pass either --events or --input, not both".into(),
            ))
        }
        (Some(inline), None) => inline
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        (None, Some(path)) => std::fs::read_to_string(path)?
            .lines()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        (None, None) => {
            return Err(Error::Usage(
                "pass the sequence via --events or --input".into(),
            ))
        }
    };
    if names.is_empty() {
        return Err(Error::Usage("empty event sequence".into()));
    }
    let unknown = names.iter().filter(|n| !vocab.contains(n)).count();
    if unknown > 0 {
        eprintln!("warning: {unknown} unknown event(s) mapped to {}", data::UNK_NAME);
    }
    let events: Vec<u32> = names.iter().map(|n| vocab.encode(n)).collect();
    let p = model.score(&events)?;
    println!("{p:.6}");
    if let Some(threshold) = args.threshold {
        println!("{}", if p >= threshold { "MALICIOUS" } else { "BENIGN" });
    }
    Ok(())
}

// ── shared ──────────────────────────────────────────────────────────────

fn write_config_echo<T: Serialize>(dir: &Path, echo: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(echo)?;
    std::fs::write(dir.join("config.json"), text + "\n")?;
    Ok(())
}

fn usage(e: Error) -> Error {
    Error::Usage(e.to_string())
}
