//! Detection of malicious files from their emulated event sequences.
//!
//! A file run inside an anti-malware emulator produces an ordered log of
//! high-level system events. This crate trains recurrent classifiers on
//! such logs end to end, from a learned event embedding all the way to a
//! single probability of maliciousness. Four architectures are provided:
//!
//! * **DSL** -- an LSTM whose final hidden state feeds a dense head.
//! * **MPL** -- an LSTM whose full hidden sequence is temporal-max-pooled
//!   before the dense head.
//! * **AoLL** -- MPL plus an auxiliary per-timestep softmax head trained to
//!   predict the next event, adding a second gradient flow.
//! * **CPoLS** -- the sequence is split into fixed-size chunks, each chunk
//!   reduced by a shared 1-D convolution and max pool, and the chunk
//!   embeddings fed to the MPL head. No truncation at any length.
//!
//! Everything runs on a small reverse-mode autodiff core ([`tensor`]) in
//! double precision, so analytic gradients can be validated against central
//! finite differences. Training is fully deterministic per seed.
//!
//! The `examples/` directory contains one runnable program per capability;
//! the `sequentinel` binary wires the same library into `generate`,
//! `train`, `eval` and `predict` subcommands.

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod eval;
pub mod layers;
pub mod models;
pub mod rng;
pub mod tensor;
pub mod training;

mod error;

pub use error::{Error, Result};
