//! Variational objective and gradient-ascent loop.
//!
//! The lower bound on the data log-likelihood is
//!
//! ```text
//! LB = −KL(q_λ ‖ prior) + (1/B₁) Σ_{a,μ,s} ln cosh(β G_μ^a + β Ξ_μ z_μ^s)
//!                       − (M/B₂) Σ_s ln Z_eq^s
//! ```
//!
//! with `G_μ^a = Σ_i λ_{iμ} σ_i^a / √N`, `Ξ_μ² = Σ_i (1 − λ_{iμ}²) / N` and
//! `ln Z_eq^s` the Bethe free energy of the equivalent model whose hidden
//! fields are `Ξ_μ z_μ^s`. Its gradient splits into a regularizer part, a
//! data part and a model part; the ascent direction is
//! `reg + data − model`.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::cavity::{weight_variances, CavityEngine, CavityState, EquivalentModel};
use crate::error::{check_dim, Error, Result};
use crate::math::{ln, ln_cosh, sqrt, tanh};
use crate::metrics::{matched_overlap, OverlapReport};
use crate::rng::RngHandle;
use crate::types::{
    BinaryWeights, FieldSample, Matrix, ModelShape, PriorMeans, SpinDataset, TrainConfig,
    VariationalParams,
};

/// Equivalent models are solved in chunks of this many field samples; the
/// per-chunk results are summed in index order, so the reduction does not
/// depend on how the chunk is scheduled.
const MODEL_CHUNK: usize = 32;

/// Means `G_μ^a` and variances `Ξ_μ²` of the Gaussian pre-activations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    /// `M×P`.
    pub g: Matrix,
    pub xi_var: Vec<f64>,
}

/// Value of the lower bound and its parts.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LowerBoundReport {
    pub kl_reg: f64,
    pub data_term: f64,
    /// `M` times the mean Bethe `ln Z_eq` over field samples.
    pub model_term: f64,
    pub lb: f64,
    /// `lb / (N·P)`.
    pub per_param_lb: f64,
    /// Message-passing runs that hit the sweep limit.
    pub mp_nonconverged: usize,
}

/// The three gradient contributions, each `N×P`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientParts {
    pub reg: Matrix,
    pub data: Matrix,
    pub model: Matrix,
    pub mp_nonconverged: usize,
}

impl GradientParts {
    /// Ascent direction `reg + data − model`.
    pub fn total(&self) -> Matrix {
        let mut out = self.reg.clone();
        for ((o, d), m) in out
            .as_mut_slice()
            .iter_mut()
            .zip(self.data.as_slice())
            .zip(self.model.as_slice())
        {
            *o += d - m;
        }
        out
    }

    fn first_non_finite(&self) -> Option<(&'static str, usize, usize)> {
        [("regularizer", &self.reg), ("data", &self.data), ("model", &self.model)]
            .into_iter()
            .find_map(|(name, m)| m.first_non_finite().map(|(r, c)| (name, r, c)))
    }
}

/// The data gradient split by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DataGradient {
    /// `(β/(B₁√N)) Σ_{a,s} σ_i^a tanh(·)`, from the dependence through `G`.
    pub mean_part: Matrix,
    /// `−(β²λ/(N B₁)) Σ_{a,s} [1 − tanh²(·)]`, from the dependence through
    /// `Ξ`, in its Gaussian-integration-by-parts form.
    pub variance_part: Matrix,
}

/// Where the random stream of a run stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RngState {
    pub master_seed: u64,
    /// Steps already consumed; step `t` draws from sub-streams indexed `t`.
    pub next_step: u64,
}

/// State at the end of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Checkpoint {
    pub step: usize,
    pub lambda: VariationalParams,
    pub prior: PriorMeans,
    pub config: TrainConfig,
    pub rng_state: RngState,
    pub trajectory_tail: Option<LowerBoundReport>,
}

/// One logged point of a training trajectory.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TrajectoryRecord {
    pub step: usize,
    pub report: LowerBoundReport,
    /// Non-converged message-passing runs in the gradient of this step.
    pub grad_mp_nonconverged: usize,
    /// Lower bound on held-out data, same field samples as `report`.
    pub held_out: Option<LowerBoundReport>,
    pub overlap: Option<OverlapReport>,
}

/// Consumer of trajectory records.
pub trait TrajectorySink {
    fn record(&mut self, record: &TrajectoryRecord) -> Result<()>;

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

impl TrajectorySink for Vec<TrajectoryRecord> {
    fn record(&mut self, record: &TrajectoryRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl TrajectorySink for NullSink {
    fn record(&mut self, _: &TrajectoryRecord) -> Result<()> {
        Ok(())
    }
}

fn check_shapes(vp: &VariationalParams, prior: &PriorMeans) -> Result<ModelShape> {
    let (a, b) = (vp.shape(), prior.shape());
    check_dim("prior rows", a.n_visible, b.n_visible)?;
    check_dim("prior columns", a.n_hidden, b.n_hidden)?;
    Ok(a)
}

/// `KL(q_λ ‖ prior) = Σ_{x=±1} Σ_{iμ} z ln(z/y)`, `z = (1+λx)/2`, `y = (1+mx)/2`.
pub fn kl_regularizer(vp: &VariationalParams, prior: &PriorMeans) -> Result<f64> {
    check_shapes(vp, prior)?;
    let mut kl = 0.0;
    for (l, m) in vp.lambda().as_slice().iter().zip(prior.means().as_slice()) {
        for x in [1.0, -1.0] {
            let z = 0.5 * (1.0 + l * x);
            let y = 0.5 * (1.0 + m * x);
            kl += z * ln(z) - z * ln(y);
        }
    }
    Ok(kl)
}

/// `−∂KL/∂λ_{iμ} = Σ_{x=±1} (x/2)(ln[(1+x m)/(1+x λ)] − 1)`.
pub fn regularizer_gradient(vp: &VariationalParams, prior: &PriorMeans) -> Result<Matrix> {
    let shape = check_shapes(vp, prior)?;
    let data = vp
        .lambda()
        .as_slice()
        .iter()
        .zip(prior.means().as_slice())
        .map(|(l, m)| {
            let plus = 0.5 * (ln((1.0 + m) / (1.0 + l)) - 1.0);
            let minus = -0.5 * (ln((1.0 - m) / (1.0 - l)) - 1.0);
            plus + minus
        })
        .collect();
    Matrix::from_vec(shape.n_visible, shape.n_hidden, data)
}

/// `G_μ^a = Σ_i λ_{iμ} σ_i^a / √N` and `Ξ_μ² = max(ε_var, Σ_i (1−λ_{iμ}²)/N)`.
pub fn gaussian_stats(vp: &VariationalParams, data: &SpinDataset, eps_var: f64) -> Result<GaussianStats> {
    let shape = vp.shape();
    check_dim("sample length", shape.n_visible, data.n_visible())?;
    let p = shape.n_hidden;
    let inv_sqrt_n = 1.0 / sqrt(shape.n_visible as f64);
    let lam = vp.lambda();
    let mut g = Matrix::zeros(data.len(), p);
    for (a, sigma) in data.iter().enumerate() {
        let row = g.row_mut(a);
        for (i, s) in sigma.iter().enumerate() {
            let lrow = lam.row(i);
            if *s > 0 {
                row.iter_mut().zip(lrow).for_each(|(r, l)| *r += l);
            } else {
                row.iter_mut().zip(lrow).for_each(|(r, l)| *r -= l);
            }
        }
        row.iter_mut().for_each(|r| *r *= inv_sqrt_n);
    }
    Ok(GaussianStats {
        g,
        xi_var: weight_variances(vp, eps_var),
    })
}

/// `count` independent vectors of `p` standard normals.
pub fn draw_field_samples(count: usize, p: usize, rng: &mut RngHandle) -> Vec<FieldSample> {
    (0..count)
        .map(|_| FieldSample {
            z: (0..p).map(|_| rng.standard_normal()).collect(),
        })
        .collect()
}

/// Field samples for the data term and for the model term, from two
/// independent sub-streams of `rng`.
pub fn draw_field_pair(
    cfg: &TrainConfig,
    p: usize,
    rng: &RngHandle,
    index: u64,
) -> (Vec<FieldSample>, Vec<FieldSample>) {
    let b1 = draw_field_samples(cfg.b1, p, &mut rng.split("fields-data", index));
    let b2 = draw_field_samples(cfg.b2, p, &mut rng.split("fields-model", index));
    (b1, b2)
}

fn check_fields(fields: &[FieldSample], p: usize) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::InvalidConfig("at least one field sample is required".into()));
    }
    for f in fields {
        check_dim("field sample", p, f.z.len())?;
    }
    Ok(())
}

/// `(1/B₁) Σ_{a,μ,s} ln cosh(β G_μ^a + β Ξ_μ z_μ^s)`.
pub fn data_term(stats: &GaussianStats, fields: &[FieldSample], beta: f64) -> Result<f64> {
    let p = stats.xi_var.len();
    check_fields(fields, p)?;
    let xi: Vec<f64> = stats.xi_var.iter().map(|v| sqrt(*v)).collect();
    let mut total = 0.0;
    for a in 0..stats.g.rows() {
        let grow = stats.g.row(a);
        for f in fields {
            for mu in 0..p {
                total += ln_cosh(beta * grow[mu] + beta * xi[mu] * f.z[mu]);
            }
        }
    }
    Ok(total / fields.len() as f64)
}

/// Data gradient for frozen field samples.
pub fn data_gradient(
    vp: &VariationalParams,
    data: &SpinDataset,
    stats: &GaussianStats,
    fields: &[FieldSample],
    beta: f64,
) -> Result<DataGradient> {
    let shape = vp.shape();
    let (n, p) = (shape.n_visible, shape.n_hidden);
    check_dim("sample length", n, data.n_visible())?;
    check_dim("Gaussian statistics rows", data.len(), stats.g.rows())?;
    check_fields(fields, p)?;
    let b1 = fields.len() as f64;
    let xi: Vec<f64> = stats.xi_var.iter().map(|v| sqrt(*v)).collect();

    // per-sample sums over s of tanh and of 1 − tanh²
    let mut tanh_sum = Matrix::zeros(data.len(), p);
    let mut sech_sum = vec![0.0; p];
    for a in 0..data.len() {
        let grow = stats.g.row(a);
        let trow = tanh_sum.row_mut(a);
        for f in fields {
            for mu in 0..p {
                let t = tanh(beta * grow[mu] + beta * xi[mu] * f.z[mu]);
                trow[mu] += t;
                sech_sum[mu] += 1.0 - t * t;
            }
        }
    }

    let mut mean_part = Matrix::zeros(n, p);
    for (a, sigma) in data.iter().enumerate() {
        let trow = tanh_sum.row(a);
        for (i, s) in sigma.iter().enumerate() {
            let row = mean_part.row_mut(i);
            if *s > 0 {
                row.iter_mut().zip(trow).for_each(|(r, t)| *r += t);
            } else {
                row.iter_mut().zip(trow).for_each(|(r, t)| *r -= t);
            }
        }
    }
    let scale = beta / (b1 * sqrt(n as f64));
    mean_part.as_mut_slice().iter_mut().for_each(|v| *v *= scale);

    let var_scale = beta * beta / (n as f64 * b1);
    let variance_part = Matrix::from_fn(n, p, |i, mu| -var_scale * vp.get(i, mu) * sech_sum[mu]);
    Ok(DataGradient {
        mean_part,
        variance_part,
    })
}

fn map_indexed<T, F>(range: core::ops::Range<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}

/// Bethe `ln Z_eq^s` for every field sample, plus how many runs did not
/// converge.
pub fn model_log_partitions(
    engine: &CavityEngine,
    vp: &VariationalParams,
    fields: &[FieldSample],
    cfg: &TrainConfig,
) -> Result<(Vec<f64>, usize)> {
    check_fields(fields, vp.shape().n_hidden)?;
    let runs = map_indexed(0..fields.len(), |s| {
        let model = EquivalentModel::from_field_sample(vp, cfg.beta, &fields[s], cfg.eps_var)?;
        let state = engine.run_message_passing(&model, None)?;
        Ok((engine.bethe_free_energy(&model, &state)?, state.converged))
    })?;
    let missed = runs.iter().filter(|r| !r.1).count();
    Ok((runs.into_iter().map(|r| r.0).collect(), missed))
}

/// Lower bound for frozen field samples.
pub fn lower_bound_with_fields(
    vp: &VariationalParams,
    prior: &PriorMeans,
    data: &SpinDataset,
    cfg: &TrainConfig,
    fields_b1: &[FieldSample],
    fields_b2: &[FieldSample],
) -> Result<LowerBoundReport> {
    let engine = CavityEngine::new(cfg);
    let (log_z, missed) = model_log_partitions(&engine, vp, fields_b2, cfg)?;
    assemble_report(vp, prior, data, cfg, fields_b1, &log_z, missed)
}

fn assemble_report(
    vp: &VariationalParams,
    prior: &PriorMeans,
    data: &SpinDataset,
    cfg: &TrainConfig,
    fields_b1: &[FieldSample],
    log_z: &[f64],
    missed: usize,
) -> Result<LowerBoundReport> {
    let kl_reg = kl_regularizer(vp, prior)?;
    let stats = gaussian_stats(vp, data, cfg.eps_var)?;
    let data_term = data_term(&stats, fields_b1, cfg.beta)?;
    let mean_log_z = log_z.iter().sum::<f64>() / log_z.len() as f64;
    let model_term = data.len() as f64 * mean_log_z;
    let lb = -kl_reg + data_term - model_term;
    Ok(LowerBoundReport {
        kl_reg,
        data_term,
        model_term,
        lb,
        per_param_lb: lb / vp.shape().n_params() as f64,
        mp_nonconverged: missed,
    })
}

/// Monte-Carlo lower bound with `B₁` and `B₂` field samples drawn from two
/// independent sub-streams of `rng`.
pub fn lower_bound(
    vp: &VariationalParams,
    prior: &PriorMeans,
    data: &SpinDataset,
    cfg: &TrainConfig,
    rng: &RngHandle,
) -> Result<LowerBoundReport> {
    let (b1, b2) = draw_field_pair(cfg, vp.shape().n_hidden, rng, 0);
    lower_bound_with_fields(vp, prior, data, cfg, &b1, &b2)
}

/// Gradient of the lower bound for frozen field samples.
pub fn gradient(
    vp: &VariationalParams,
    prior: &PriorMeans,
    data: &SpinDataset,
    fields_b1: &[FieldSample],
    fields_b2: &[FieldSample],
    cfg: &TrainConfig,
) -> Result<GradientParts> {
    let engine = CavityEngine::new(cfg);
    gradient_with_engine(&engine, vp, prior, data, fields_b1, fields_b2, cfg, None)
}

#[allow(clippy::too_many_arguments)]
fn gradient_with_engine(
    engine: &CavityEngine,
    vp: &VariationalParams,
    prior: &PriorMeans,
    data: &SpinDataset,
    fields_b1: &[FieldSample],
    fields_b2: &[FieldSample],
    cfg: &TrainConfig,
    mut warm: Option<&mut Vec<Option<CavityState>>>,
) -> Result<GradientParts> {
    let shape = check_shapes(vp, prior)?;
    let (n, p) = (shape.n_visible, shape.n_hidden);
    check_fields(fields_b2, p)?;
    let reg = regularizer_gradient(vp, prior)?;
    let stats = gaussian_stats(vp, data, cfg.eps_var)?;
    let dg = data_gradient(vp, data, &stats, fields_b1, cfg.beta)?;
    let mut data_part = dg.mean_part;
    for (d, v) in data_part.as_mut_slice().iter_mut().zip(dg.variance_part.as_slice()) {
        *d += v;
    }

    let inv_sqrt_n = 1.0 / sqrt(n as f64);
    let xi: Vec<f64> = stats.xi_var.iter().map(|v| sqrt(*v)).collect();
    if let Some(w) = warm.as_deref_mut() {
        w.resize(fields_b2.len(), None);
    }
    let mut model = Matrix::zeros(n, p);
    let mut missed = 0;
    let mut start = 0;
    while start < fields_b2.len() {
        let end = (start + MODEL_CHUNK).min(fields_b2.len());
        let inits: Vec<Option<CavityState>> = match warm.as_deref_mut() {
            Some(w) => w[start..end].iter_mut().map(Option::take).collect(),
            None => vec![None; end - start],
        };
        let chunk = map_indexed(start..end, |s| {
            let field = &fields_b2[s];
            let eq = EquivalentModel::new(
                vp,
                cfg.beta,
                xi.iter().zip(&field.z).map(|(x, z)| x * z).collect(),
                stats.xi_var.clone(),
            )?;
            let state = engine.run_message_passing(&eq, inits[s - start].as_ref())?;
            let th = engine.moments(&eq, &state)?;
            let mut contrib = th.corr;
            for i in 0..n {
                let row = contrib.row_mut(i);
                for mu in 0..p {
                    row[mu] -= vp.get(i, mu) * field.z[mu] * inv_sqrt_n / xi[mu] * th.m_hid[mu];
                }
            }
            Ok((contrib, state))
        })?;
        for (k, (contrib, state)) in chunk.into_iter().enumerate() {
            for (m, c) in model.as_mut_slice().iter_mut().zip(contrib.as_slice()) {
                *m += c;
            }
            if !state.converged {
                missed += 1;
            }
            if let Some(w) = warm.as_deref_mut() {
                w[start + k] = Some(state);
            }
        }
        start = end;
    }
    let scale = data.len() as f64 * cfg.beta * inv_sqrt_n / fields_b2.len() as f64;
    model.as_mut_slice().iter_mut().for_each(|v| *v *= scale);

    Ok(GradientParts {
        reg,
        data: data_part,
        model,
        mp_nonconverged: missed,
    })
}

/// Training run builder.
pub struct Trainer<'a> {
    data: &'a SpinDataset,
    prior: &'a PriorMeans,
    cfg: TrainConfig,
    init: Option<VariationalParams>,
    planted: Option<&'a BinaryWeights>,
    held_out: Option<&'a SpinDataset>,
}

impl<'a> Trainer<'a> {
    pub fn new(data: &'a SpinDataset, prior: &'a PriorMeans, cfg: TrainConfig) -> Self {
        Self {
            data,
            prior,
            cfg,
            init: None,
            planted: None,
            held_out: None,
        }
    }

    /// Start from `init` instead of the random initialization.
    pub fn with_init(mut self, init: Option<VariationalParams>) -> Self {
        self.init = init;
        self
    }

    /// Report matched overlaps against these weights at each logged step.
    pub fn with_planted(mut self, planted: &'a BinaryWeights) -> Self {
        self.planted = Some(planted);
        self
    }

    /// Also report the lower bound on this dataset at each logged step.
    pub fn with_held_out(mut self, held_out: &'a SpinDataset) -> Self {
        self.held_out = Some(held_out);
        self
    }

    /// `λ` drawn uniformly in `[−init_scale, init_scale]` from the `"init"`
    /// sub-stream of the run seed.
    pub fn initial_params(shape: ModelShape, cfg: &TrainConfig) -> Result<VariationalParams> {
        let mut rng = RngHandle::new(cfg.seed).split("init", 0);
        let s = cfg.init_scale;
        let m = Matrix::from_fn(shape.n_visible, shape.n_hidden, |_, _| rng.uniform_range(-s, s));
        VariationalParams::new_clipped(shape, m, cfg.eps_clip)
    }

    fn learning_rate(&self, step: usize) -> f64 {
        let w = self.cfg.warmup_steps;
        if w == 0 || step >= w {
            self.cfg.eta
        } else {
            self.cfg.eta * step as f64 / w as f64
        }
    }

    /// Runs `cfg.steps` ascent steps.
    ///
    /// Step `t` draws fresh field samples from sub-streams indexed `t`
    /// (index 0 at every step with `frozen_fields`). Logged lower bounds all
    /// use one fixed pair of evaluation field samples, so successive records
    /// differ only through `λ`.
    pub fn run(self, sink: &mut dyn TrajectorySink) -> Result<Checkpoint> {
        let cfg = &self.cfg;
        cfg.validate()?;
        let shape = self.prior.shape();
        check_dim("sample length", shape.n_visible, self.data.n_visible())?;
        if let Some(h) = self.held_out {
            check_dim("held-out sample length", shape.n_visible, h.n_visible())?;
        }
        if let Some(w) = self.planted {
            check_dim("planted rows", shape.n_visible, w.shape().n_visible)?;
            check_dim("planted columns", shape.n_hidden, w.shape().n_hidden)?;
        }
        let mut vp = match self.init.clone() {
            Some(v) => {
                check_shapes(&v, self.prior)?;
                VariationalParams::new_clipped(shape, v.into_matrix(), cfg.eps_clip)?
            }
            None => Self::initial_params(shape, cfg)?,
        };

        let master = RngHandle::new(cfg.seed);
        let engine = CavityEngine::new(cfg);
        let eval_rng = master.split("evaluation", 0);
        let (eval_b1, eval_b2) = draw_field_pair(cfg, shape.n_hidden, &eval_rng, 0);
        let mut warm: Vec<Option<CavityState>> = Vec::new();

        let log = |step: usize, vp: &VariationalParams, grad_missed: usize, sink: &mut dyn TrajectorySink| -> Result<LowerBoundReport> {
            let (log_z, missed) = model_log_partitions(&engine, vp, &eval_b2, cfg)?;
            let report = assemble_report(vp, self.prior, self.data, cfg, &eval_b1, &log_z, missed)?;
            let held_out = match self.held_out {
                Some(h) => Some(assemble_report(vp, self.prior, h, cfg, &eval_b1, &log_z, missed)?),
                None => None,
            };
            let overlap = match self.planted {
                Some(w) => Some(matched_overlap(&vp.decode(), w)?),
                None => None,
            };
            sink.record(&TrajectoryRecord {
                step,
                report: report.clone(),
                grad_mp_nonconverged: grad_missed,
                held_out,
                overlap,
            })?;
            Ok(report)
        };

        let mut tail = Some(log(0, &vp, 0, sink)?);
        for step in 1..=cfg.steps {
            let index = if cfg.frozen_fields { 0 } else { step as u64 };
            let (b1, b2) = draw_field_pair(cfg, shape.n_hidden, &master, index);
            let warm_ref = if cfg.warm_start { Some(&mut warm) } else { None };
            let parts = gradient_with_engine(&engine, &vp, self.prior, self.data, &b1, &b2, cfg, warm_ref)?;
            if let Some((term, row, col)) = parts.first_non_finite() {
                return Err(Error::NumericalAbort { step, term, row, col });
            }
            let mut update = parts.total();
            let eta = self.learning_rate(step);
            update.as_mut_slice().iter_mut().for_each(|v| *v *= eta);
            vp.apply_update(&update, cfg.eps_clip);
            if let Some((row, col)) = vp.lambda().first_non_finite() {
                return Err(Error::NumericalAbort { step, term: "update", row, col });
            }
            if step % cfg.log_every == 0 || step == cfg.steps {
                tail = Some(log(step, &vp, parts.mp_nonconverged, sink)?);
            }
        }
        sink.finish()?;

        Ok(Checkpoint {
            step: cfg.steps,
            lambda: vp,
            prior: self.prior.clone(),
            config: cfg.clone(),
            rng_state: RngState {
                master_seed: cfg.seed,
                next_step: cfg.steps as u64 + 1,
            },
            trajectory_tail: tail,
        })
    }
}

/// Trains from `init` (or the default random start) and streams records to
/// `sink`.
pub fn train(
    data: &SpinDataset,
    prior: &PriorMeans,
    cfg: &TrainConfig,
    init: Option<VariationalParams>,
    sink: &mut dyn TrajectorySink,
) -> Result<Checkpoint> {
    Trainer::new(data, prior, cfg.clone()).with_init(init).run(sink)
}
