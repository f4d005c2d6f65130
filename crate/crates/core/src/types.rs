//! Shared domain types.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Visible (`N`) and hidden (`P`) layer sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ModelShape {
    pub n_visible: usize,
    pub n_hidden: usize,
}

impl ModelShape {
    pub fn new(n_visible: usize, n_hidden: usize) -> Result<Self> {
        if n_visible == 0 || n_hidden == 0 {
            return Err(Error::InvalidConfig(format!(
                "shape must have N >= 1 and P >= 1, got N = {n_visible}, P = {n_hidden}"
            )));
        }
        Ok(Self {
            n_visible,
            n_hidden,
        })
    }

    /// Number of synapses, `N·P`.
    pub fn n_params(&self) -> usize {
        self.n_visible * self.n_hidden
    }
}

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("matrix data", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |r| self.data[r * self.cols + c])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Position of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|k| (k / self.cols, k % self.cols))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

fn validate_means(what: &'static str, shape: ModelShape, m: &Matrix) -> Result<()> {
    check_dim("rows", shape.n_visible, m.rows())?;
    check_dim("columns", shape.n_hidden, m.cols())?;
    if !m.is_finite() {
        return Err(Error::NonFinite(what));
    }
    if m.max_abs() >= 1.0 {
        return Err(Error::OutOfRange(format!(
            "{what} entries must lie strictly inside (-1, 1), max |entry| = {}",
            m.max_abs()
        )));
    }
    Ok(())
}

fn clip_in_place(m: &mut Matrix, eps_clip: f64) {
    let bound = 1.0 - eps_clip;
    for v in m.as_mut_slice() {
        *v = v.clamp(-bound, bound);
    }
}

/// Means `λ_{iμ}` of the factorized variational distribution over the
/// binary weights, stored as an `N×P` matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct VariationalParams {
    shape: ModelShape,
    lambda: Matrix,
}

impl VariationalParams {
    /// Entries must be finite and strictly inside `(-1, 1)`.
    pub fn new(shape: ModelShape, lambda: Matrix) -> Result<Self> {
        validate_means("variational parameters", shape, &lambda)?;
        Ok(Self { shape, lambda })
    }

    /// Like [`VariationalParams::new`] but clamps into `[-1+ε, 1-ε]` first.
    pub fn new_clipped(shape: ModelShape, mut lambda: Matrix, eps_clip: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite("variational parameters"));
        }
        clip_in_place(&mut lambda, eps_clip);
        Self::new(shape, lambda)
    }

    pub fn zeros(shape: ModelShape) -> Self {
        Self {
            shape,
            lambda: Matrix::zeros(shape.n_visible, shape.n_hidden),
        }
    }

    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }

    #[inline]
    pub fn get(&self, i: usize, mu: usize) -> f64 {
        self.lambda[(i, mu)]
    }

    /// Adds `step` entrywise and clamps to `[-1+ε, 1-ε]`.
    pub(crate) fn apply_update(&mut self, step: &Matrix, eps_clip: f64) {
        for (v, d) in self.lambda.as_mut_slice().iter_mut().zip(step.as_slice()) {
            *v += d;
        }
        clip_in_place(&mut self.lambda, eps_clip);
    }

    /// Hard decoding `ξ = sgn(λ)`; see [`decode_weights`].
    pub fn decode(&self) -> BinaryWeights {
        decode_weights(self)
    }

    pub fn into_matrix(self) -> Matrix {
        self.lambda
    }
}

/// Means `m_{iμ}` of the factorized prior over the weights.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PriorMeans {
    shape: ModelShape,
    m: Matrix,
}

impl PriorMeans {
    pub fn new(shape: ModelShape, m: Matrix) -> Result<Self> {
        validate_means("prior means", shape, &m)?;
        Ok(Self { shape, m })
    }

    /// The uniform prior, `m ≡ 0`.
    pub fn uniform(shape: ModelShape) -> Self {
        Self {
            shape,
            m: Matrix::zeros(shape.n_visible, shape.n_hidden),
        }
    }

    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    pub fn means(&self) -> &Matrix {
        &self.m
    }

    #[inline]
    pub fn get(&self, i: usize, mu: usize) -> f64 {
        self.m[(i, mu)]
    }
}

/// Binary weight matrix `ξ ∈ {-1, +1}^{N×P}`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BinaryWeights {
    shape: ModelShape,
    xi: Vec<i8>,
}

impl BinaryWeights {
    pub fn new(shape: ModelShape, xi: Vec<i8>) -> Result<Self> {
        check_dim("weight entries", shape.n_params(), xi.len())?;
        if xi.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::OutOfRange("weights must be exactly +1 or -1".into()));
        }
        Ok(Self { shape, xi })
    }

    pub fn from_fn(shape: ModelShape, mut f: impl FnMut(usize, usize) -> i8) -> Result<Self> {
        let mut xi = Vec::with_capacity(shape.n_params());
        for i in 0..shape.n_visible {
            for mu in 0..shape.n_hidden {
                xi.push(f(i, mu));
            }
        }
        Self::new(shape, xi)
    }

    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, i: usize, mu: usize) -> i8 {
        self.xi[i * self.shape.n_hidden + mu]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.xi
    }

    /// Receptive field of hidden unit `mu`.
    pub fn column(&self, mu: usize) -> impl Iterator<Item = i8> + '_ {
        let p = self.shape.n_hidden;
        (0..self.shape.n_visible).map(move |i| self.xi[i * p + mu])
    }

    /// Real-valued copy, handy as couplings of an equivalent model.
    pub fn to_matrix(&self) -> Matrix {
        let p = self.shape.n_hidden;
        Matrix::from_fn(self.shape.n_visible, p, |i, mu| f64::from(self.xi[i * p + mu]))
    }

    /// Copy with hidden columns reordered: column `k` of the result is
    /// column `order[k]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        check_dim("column order", self.shape.n_hidden, order.len())?;
        Self::from_fn(self.shape, |i, k| self.get(i, order[k]))
    }

    /// Copy with column `mu` negated.
    pub fn flip_column(&self, mu: usize) -> Self {
        let mut out = self.clone();
        let p = self.shape.n_hidden;
        for i in 0..self.shape.n_visible {
            out.xi[i * p + mu] = -out.xi[i * p + mu];
        }
        out
    }
}

/// `ξ_{iμ} = sgn(λ_{iμ})`, with the tie `λ = 0` decoded as `+1`.
pub fn decode_weights(vp: &VariationalParams) -> BinaryWeights {
    let xi = vp
        .lambda()
        .as_slice()
        .iter()
        .map(|&v| if v < 0.0 { -1 } else { 1 })
        .collect();
    BinaryWeights {
        shape: vp.shape(),
        xi,
    }
}

/// One visible configuration `σ ∈ {-1, +1}^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(sigma: Vec<i8>) -> Result<Self> {
        if sigma.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::OutOfRange("spins must be exactly +1 or -1".into()));
        }
        Ok(Self(sigma))
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl core::ops::Deref for SpinConfig {
    type Target = [i8];

    fn deref(&self) -> &[i8] {
        &self.0
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DataSource {
    Planted,
    Mnist,
    #[default]
    External,
}

/// Provenance of a [`SpinDataset`].
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DatasetMeta {
    pub source: DataSource,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub burn_in: Option<u64>,
    pub thinning: Option<u64>,
    /// Binarization threshold for image data.
    pub threshold: Option<u8>,
    pub source_file: Option<String>,
    /// Index of the first sample within the source file.
    pub first_index: Option<u64>,
    pub notes: Vec<String>,
}

/// `M` visible configurations of length `N`, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SpinDataset {
    n: usize,
    spins: Vec<i8>,
    pub meta: DatasetMeta,
}

impl SpinDataset {
    pub fn new(n: usize, samples: &[SpinConfig], meta: DatasetMeta) -> Result<Self> {
        let mut spins = Vec::with_capacity(n * samples.len());
        for s in samples {
            check_dim("sample length", n, s.len())?;
            spins.extend_from_slice(s);
        }
        Self::from_flat(n, spins, meta)
    }

    /// `spins` holds `M` samples of length `n` back to back.
    pub fn from_flat(n: usize, spins: Vec<i8>, meta: DatasetMeta) -> Result<Self> {
        if n == 0 || spins.is_empty() {
            return Err(Error::InvalidConfig(
                "dataset needs N >= 1 and at least one sample".into(),
            ));
        }
        if !spins.len().is_multiple_of(n) {
            return Err(Error::DimensionMismatch {
                what: "flat spin buffer (multiple of N)",
                expected: (spins.len() / n + 1) * n,
                found: spins.len(),
            });
        }
        if spins.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::OutOfRange("spins must be exactly +1 or -1".into()));
        }
        Ok(Self { n, spins, meta })
    }

    pub fn n_visible(&self) -> usize {
        self.n
    }

    /// Number of samples `M`.
    pub fn len(&self) -> usize {
        self.spins.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    #[inline]
    pub fn sample(&self, a: usize) -> &[i8] {
        &self.spins[a * self.n..(a + 1) * self.n]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, i8> {
        self.spins.chunks_exact(self.n)
    }

    pub fn as_flat(&self) -> &[i8] {
        &self.spins
    }

    /// Samples `range` as a new dataset with the same metadata, with
    /// `first_index` shifted accordingly.
    pub fn slice(&self, range: core::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::OutOfRange(format!(
                "sample range {}..{} outside 0..{}",
                range.start,
                range.end,
                self.len()
            )));
        }
        let mut meta = self.meta.clone();
        meta.first_index = Some(meta.first_index.unwrap_or(0) + range.start as u64);
        Ok(Self {
            n: self.n,
            spins: self.spins[range.start * self.n..range.end * self.n].to_vec(),
            meta,
        })
    }
}

/// Hyper-parameters of a training run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    /// Inverse temperature `β`.
    pub beta: f64,
    /// Learning rate `η`.
    pub eta: f64,
    /// Field samples for the data term.
    pub b1: usize,
    /// Field samples (equivalent models) for the model term.
    pub b2: usize,
    pub steps: usize,
    pub seed: u64,
    pub mp_max_sweeps: usize,
    pub mp_tol: f64,
    pub mp_damping: f64,
    /// Gauss–Hermite order for the hidden-unit averages.
    pub quad_points: usize,
    pub eps_clip: f64,
    pub eps_var: f64,
    /// Emit a trajectory record every this many steps (and at the last).
    pub log_every: usize,
    /// Linear learning-rate warm-up length; 0 disables it.
    pub warmup_steps: usize,
    /// Half-width of the uniform initialization of `λ`.
    pub init_scale: f64,
    /// Reuse the same field samples at every step (debugging only).
    pub frozen_fields: bool,
    /// Warm-start message passing from the previous step's state for the
    /// same sample index.
    pub warm_start: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            eta: 0.05,
            b1: 1000,
            b2: 1000,
            steps: 200,
            seed: 0,
            mp_max_sweeps: 200,
            mp_tol: 1e-8,
            mp_damping: 0.0,
            quad_points: 21,
            eps_clip: 1e-3,
            eps_var: 1e-8,
            log_every: 1,
            warmup_steps: 0,
            init_scale: 0.01,
            frozen_fields: false,
            warm_start: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return bad(format!("eta must be finite and >= 0, got {}", self.eta));
        }
        if self.b1 == 0 || self.b2 == 0 {
            return bad("b1 and b2 must be >= 1".into());
        }
        if self.mp_max_sweeps == 0 {
            return bad("mp_max_sweeps must be >= 1".into());
        }
        if self.mp_tol.is_nan() || self.mp_tol <= 0.0 {
            return bad(format!("mp_tol must be > 0, got {}", self.mp_tol));
        }
        if !(0.0..1.0).contains(&self.mp_damping) {
            return bad(format!("mp_damping must lie in [0, 1), got {}", self.mp_damping));
        }
        if self.quad_points == 0 || self.quad_points > 200 {
            return bad(format!("quad_points must lie in 1..=200, got {}", self.quad_points));
        }
        if !(self.eps_clip > 0.0 && self.eps_clip < 0.5) {
            return bad(format!("eps_clip must lie in (0, 0.5), got {}", self.eps_clip));
        }
        if !(self.eps_var > 0.0 && self.eps_var < 1.0) {
            return bad(format!("eps_var must lie in (0, 1), got {}", self.eps_var));
        }
        if self.log_every == 0 {
            return bad("log_every must be >= 1".into());
        }
        if !(self.init_scale >= 0.0 && self.init_scale < 1.0 - self.eps_clip) {
            return bad(format!("init_scale out of range: {}", self.init_scale));
        }
        Ok(())
    }
}

/// One draw of `P` standard normals defining the quenched fields of an
/// equivalent model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FieldSample {
    pub z: Vec<f64>,
}

impl FieldSample {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field sample"));
        }
        Ok(Self { z })
    }
}
