//! Variational mean-field training of restricted Boltzmann machines whose
//! synapses are binary (±1).
//!
//! The learner keeps a factorized distribution over the weights, one mean
//! `λ_{iμ} ∈ (-1, 1)` per synapse, and climbs a Monte-Carlo estimate of the
//! evidence lower bound. The data-dependent part of the gradient is a set of
//! Gaussian averages over the training samples; the model-dependent part is
//! read off the fixed point of cavity message passing on an *equivalent* RBM
//! whose couplings are `λ/√N` and whose hidden units feel quenched random
//! fields.
//!
//! The crate is `no_std` (it needs `alloc`). All transcendental functions go
//! through [`libm`], so a fixed seed reproduces the same bits on every host.
//! File formats, the command-line front end and trajectory writers live in
//! the `binrbm` companion crate.
//!
//! Module map:
//!
//! * [`types`] and [`rng`]: shared value types and the seeded, splittable RNG.
//! * [`planted`]: ground-truth weight generation and block Gibbs sampling.
//! * [`cavity`]: message passing, Bethe free energy and moments of the
//!   equivalent RBM.
//! * [`trainer`]: KL regularizer, lower bound, gradient and the ascent loop.
//! * [`oracle`]: brute-force enumeration for small systems.
//! * [`metrics`]: gauge- and permutation-matched overlaps.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod cavity;
pub mod error;
pub mod math;
pub mod metrics;
pub mod oracle;
pub mod planted;
pub mod quadrature;
pub mod rng;
pub mod trainer;
pub mod types;

pub use error::{Error, Result};
pub use rng::{seed_rng, RngHandle};
pub use types::{
    decode_weights, BinaryWeights, DataSource, DatasetMeta, FieldSample, Matrix, ModelShape,
    PriorMeans, SpinConfig, SpinDataset, TrainConfig, VariationalParams,
};
