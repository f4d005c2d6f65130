//! Planted models: ground-truth binary weights and block Gibbs sampling of
//! the RBM they define.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::math::{logistic, sqrt};
use crate::rng::RngHandle;
use crate::types::{BinaryWeights, DataSource, DatasetMeta, ModelShape, SpinDataset};

/// Largest correlation level accepted by [`plant_weights`].
pub const MAX_CORRELATION: f64 = 0.99;

/// How a planted weight matrix was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PlantMethod {
    /// Exactly orthogonal columns (`c = 0`).
    Orthogonal,
    /// Columns copied from column 0 with flip probability `(1 − c)/2`.
    Correlated,
    /// `c = 0` requested but no exact construction exists for this shape;
    /// columns are i.i.d. uniform instead.
    IndependentFallback,
}

/// Ground-truth RBM.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PlantedModel {
    pub weights: BinaryWeights,
    pub beta: f64,
    pub correlation: f64,
    pub seed: u64,
    pub method: PlantMethod,
}

impl PlantedModel {
    /// Plants weights from a dedicated `"plant"` sub-stream of `seed`.
    pub fn generate(shape: ModelShape, correlation: f64, beta: f64, seed: u64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::OutOfRange(format!("beta must be finite and >= 0, got {beta}")));
        }
        let mut rng = RngHandle::new(seed).split("plant", 0);
        let (weights, method) = plant_weights(shape, correlation, &mut rng)?;
        Ok(Self {
            weights,
            beta,
            correlation,
            seed,
            method,
        })
    }

    pub fn shape(&self) -> ModelShape {
        self.weights.shape()
    }

    /// `(1/N) ξ^μ · ξ^ν` for every pair `μ < ν`.
    pub fn pairwise_overlaps(&self) -> Vec<(usize, usize, f64)> {
        let shape = self.shape();
        let mut out = Vec::new();
        for mu in 0..shape.n_hidden {
            for nu in mu + 1..shape.n_hidden {
                let dot: i64 = self
                    .weights
                    .column(mu)
                    .zip(self.weights.column(nu))
                    .map(|(a, b)| i64::from(a) * i64::from(b))
                    .sum();
                out.push((mu, nu, dot as f64 / shape.n_visible as f64));
            }
        }
        out
    }
}

/// Draws a planted weight matrix at correlation level `c`.
///
/// * `c = 0`: columns of a Sylvester–Hadamard matrix `H_K` (`K` the largest
///   power of two dividing `N`) repeated `N/K` times, each row multiplied by
///   a random sign, rows randomly permuted. Columns are exactly orthogonal.
///   Needs `N % 4 == 0` and `P ≤ K`; otherwise columns are i.i.d. and the
///   method is [`PlantMethod::IndependentFallback`].
/// * `c > 0`: column 0 uniform; every other column copies column 0 entrywise
///   with probability `(1 + c)/2` and flips it otherwise, so the expected
///   overlap with column 0 is `c`.
pub fn plant_weights(
    shape: ModelShape,
    c: f64,
    rng: &mut RngHandle,
) -> Result<(BinaryWeights, PlantMethod)> {
    if !(0.0..=MAX_CORRELATION).contains(&c) {
        return Err(Error::OutOfRange(format!(
            "correlation must lie in [0, {MAX_CORRELATION}], got {c}"
        )));
    }
    let (n, p) = (shape.n_visible, shape.n_hidden);
    if c == 0.0 {
        let k = 1usize << n.trailing_zeros();
        if n % 4 == 0 && p <= k {
            return Ok((orthogonal(shape, k, rng)?, PlantMethod::Orthogonal));
        }
        let xi = (0..n * p).map(|_| rng.spin(0.5)).collect();
        return Ok((BinaryWeights::new(shape, xi)?, PlantMethod::IndependentFallback));
    }
    let base: Vec<i8> = (0..n).map(|_| rng.spin(0.5)).collect();
    let keep = 0.5 * (1.0 + c);
    let mut xi = vec![0i8; n * p];
    for (i, b) in base.iter().enumerate() {
        xi[i * p] = *b;
    }
    for mu in 1..p {
        for (i, b) in base.iter().enumerate() {
            xi[i * p + mu] = b * rng.spin(keep);
        }
    }
    Ok((BinaryWeights::new(shape, xi)?, PlantMethod::Correlated))
}

fn orthogonal(shape: ModelShape, k: usize, rng: &mut RngHandle) -> Result<BinaryWeights> {
    let (n, p) = (shape.n_visible, shape.n_hidden);
    // distinct Hadamard columns; entry (r, c) of H_K is (-1)^{popcount(r & c)}
    let mut cols: Vec<usize> = (0..k).collect();
    rng.shuffle(&mut cols);
    cols.truncate(p);
    let row_sign: Vec<i8> = (0..n).map(|_| rng.spin(0.5)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    BinaryWeights::from_fn(shape, |i, mu| {
        let src = order[i];
        let h = if ((src % k) & cols[mu]).count_ones().is_multiple_of(2) { 1 } else { -1 };
        h * row_sign[src]
    })
}

/// `Pr[τ_μ = +1 | σ] = 1/(1 + e^{−2β X_μ})`, `X_μ = ξ^μ·σ/√N`.
pub fn hidden_conditional(model: &PlantedModel, sigma: &[i8]) -> Result<Vec<f64>> {
    let shape = model.shape();
    check_dim("spin configuration", shape.n_visible, sigma.len())?;
    let inv_sqrt_n = 1.0 / sqrt(shape.n_visible as f64);
    let mut x = vec![0.0; shape.n_hidden];
    for (i, s) in sigma.iter().enumerate() {
        for (mu, xm) in x.iter_mut().enumerate() {
            *xm += f64::from(model.weights.get(i, mu) * s);
        }
    }
    Ok(x
        .into_iter()
        .map(|v| logistic(2.0 * model.beta * v * inv_sqrt_n))
        .collect())
}

/// Sweeps and sample count of a Gibbs run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GibbsConfig {
    pub burn_in: usize,
    /// Sweeps between kept samples.
    pub thinning: usize,
    pub n_samples: usize,
}

impl GibbsConfig {
    pub fn new(n_samples: usize) -> Self {
        Self {
            burn_in: 1000,
            thinning: 100,
            n_samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be >= 1".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("number of samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Block Gibbs chain over `(σ, τ)`: all hidden units given `σ`, then all
/// visible units given `τ`. One such pair is a sweep.
pub struct GibbsChain<'m> {
    model: &'m PlantedModel,
    sigma: Vec<i8>,
    tau: Vec<i8>,
    field: Vec<f64>,
    scale: f64,
}

impl<'m> GibbsChain<'m> {
    /// Chain started from a uniformly random `σ`.
    pub fn new(model: &'m PlantedModel, rng: &mut RngHandle) -> Self {
        let shape = model.shape();
        Self {
            model,
            sigma: (0..shape.n_visible).map(|_| rng.spin(0.5)).collect(),
            tau: vec![1; shape.n_hidden],
            field: vec![0.0; shape.n_hidden],
            scale: 2.0 * model.beta / sqrt(shape.n_visible as f64),
        }
    }

    pub fn sigma(&self) -> &[i8] {
        &self.sigma
    }

    pub fn sweep(&mut self, rng: &mut RngHandle) {
        let p = self.tau.len();
        let w = self.model.weights.as_slice();
        self.field.iter_mut().for_each(|f| *f = 0.0);
        for (i, s) in self.sigma.iter().enumerate() {
            let s = f64::from(*s);
            for (f, x) in self.field.iter_mut().zip(&w[i * p..(i + 1) * p]) {
                *f += f64::from(*x) * s;
            }
        }
        for (t, f) in self.tau.iter_mut().zip(&self.field) {
            *t = rng.spin(logistic(self.scale * f));
        }
        for (i, s) in self.sigma.iter_mut().enumerate() {
            let h: i32 = w[i * p..(i + 1) * p]
                .iter()
                .zip(&self.tau)
                .map(|(x, t)| i32::from(x * t))
                .sum();
            *s = rng.spin(logistic(self.scale * f64::from(h)));
        }
    }
}

/// Runs one chain and keeps every `thinning`-th `σ` after `burn_in` sweeps.
pub fn gibbs_sample(
    model: &PlantedModel,
    cfg: &GibbsConfig,
    rng: &mut RngHandle,
) -> Result<SpinDataset> {
    cfg.validate()?;
    let seed = rng.key();
    let mut chain = GibbsChain::new(model, rng);
    for _ in 0..cfg.burn_in {
        chain.sweep(rng);
    }
    let n = model.shape().n_visible;
    let mut spins = Vec::with_capacity(n * cfg.n_samples);
    for _ in 0..cfg.n_samples {
        for _ in 0..cfg.thinning {
            chain.sweep(rng);
        }
        spins.extend_from_slice(chain.sigma());
    }
    let mut notes = Vec::new();
    notes.push(format!("planted correlation {}", model.correlation));
    notes.push(format!("planted method {:?}", model.method));
    notes.push(format!("planted seed {}", model.seed));
    let meta = DatasetMeta {
        source: DataSource::Planted,
        beta: Some(model.beta),
        seed: Some(seed),
        burn_in: Some(cfg.burn_in as u64),
        thinning: Some(cfg.thinning as u64),
        notes,
        ..DatasetMeta::default()
    };
    SpinDataset::from_flat(n, spins, meta)
}
