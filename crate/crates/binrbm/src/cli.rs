//! Command-line front end.
//!
//! Every command writes its primary outputs atomically and a
//! `<output>.manifest.json` next to the first of them. Set `BINRBM_THREADS`
//! to bound the worker pool; results do not depend on it.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use binrbm_core::metrics::matched_overlap;
use binrbm_core::planted::{gibbs_sample, GibbsConfig, PlantedModel};
use binrbm_core::trainer::{lower_bound, Checkpoint, TrajectoryRecord, Trainer};
use binrbm_core::{ModelShape, PriorMeans, RngHandle, SpinDataset, TrainConfig};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::container::{self, write_atomic};
use crate::error::{Error, Result};
use crate::experiment::{cell_seed, planted_run, PlantedSetup};
use crate::idx::{load_mnist, DEFAULT_THRESHOLD};
use crate::manifest::RunManifest;
use crate::plot::{line_plot, Series};
use crate::sink::{CsvTrajectory, JsonlTrajectory, Tee};

pub const THREADS_ENV: &str = "BINRBM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "binrbm", version, about = "Variational training of RBMs with binary synapses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted model.
    Plant(PlantArgs),
    /// Draw a dataset from a planted model by block Gibbs sampling.
    Sample(SampleArgs),
    /// Train on a dataset.
    Train(TrainArgs),
    /// Score a checkpoint against a planted model or a dataset.
    Eval(EvalArgs),
    /// Recovery quality over a grid of data densities.
    Sweep(SweepArgs),
    /// Train on binarized MNIST with a held-out split.
    Mnist(MnistArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlantArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 100)]
    pub thin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Optimizer and message-passing knobs shared by the training commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Hyper {
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Field samples for the data term [default: 1000, 500 for `mnist`].
    #[arg(long)]
    pub b1: Option<usize>,
    /// Field samples for the model term [default: 1000, 500 for `mnist`].
    #[arg(long)]
    pub b2: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub log_every: usize,
    /// Linear learning-rate warm-up length.
    #[arg(long, default_value_t = 0)]
    pub warmup: usize,
    #[arg(long, default_value_t = 0.01)]
    pub init_scale: f64,
    /// Reuse one set of field samples for every step.
    #[arg(long)]
    pub frozen_fields: bool,
    /// Start message passing from the previous step's fixed point.
    #[arg(long)]
    pub warm_start: bool,
    #[arg(long, default_value_t = 200)]
    pub mp_max_sweeps: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub mp_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mp_damping: f64,
    #[arg(long, default_value_t = 21)]
    pub quad_points: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub eps_clip: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps_var: f64,
}

impl Hyper {
    pub fn config(&self, default_b: usize) -> TrainConfig {
        TrainConfig {
            beta: self.beta,
            eta: self.eta,
            b1: self.b1.unwrap_or(default_b),
            b2: self.b2.unwrap_or(default_b),
            steps: self.steps,
            seed: self.seed,
            mp_max_sweeps: self.mp_max_sweeps,
            mp_tol: self.mp_tol,
            mp_damping: self.mp_damping,
            quad_points: self.quad_points,
            eps_clip: self.eps_clip,
            eps_var: self.eps_var,
            log_every: self.log_every,
            warmup_steps: self.warmup,
            init_scale: self.init_scale,
            frozen_fields: self.frozen_fields,
            warm_start: self.warm_start,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Number of hidden units.
    #[arg(long)]
    pub p: usize,
    #[command(flatten)]
    pub hyper: Hyper,
    /// Checkpoint whose λ become the prior means (default: uniform prior).
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Checkpoint whose λ replace the random initialization.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Track matched overlaps against this planted model.
    #[arg(long)]
    pub planted_model: Option<PathBuf>,
    /// Also report the lower bound on this dataset.
    #[arg(long)]
    pub held_out: Option<PathBuf>,
    #[arg(long)]
    pub out_checkpoint: PathBuf,
    #[arg(long)]
    pub out_trajectory: PathBuf,
    /// Additional JSON-lines trajectory.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
    /// SVG plot of the per-parameter bound and KL.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["planted_model", "data"])))]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub planted_model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Comma-separated data densities α = M/N.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "0.25,0.5,1,2,3,5")]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 100)]
    pub thin: usize,
    #[command(flatten)]
    pub hyper: Hyper,
    #[arg(long)]
    pub out_csv: PathBuf,
    /// SVG plot of mean_q against α with error bars over replicates.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MnistArgs {
    /// IDX image file.
    #[arg(long)]
    pub images: PathBuf,
    /// Images read from the start of the file.
    #[arg(long, default_value_t = 2000)]
    pub limit: usize,
    /// Pixels at or above this value become +1.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: u8,
    /// Training images; the rest of the first `limit` are held out
    /// [default: half].
    #[arg(long)]
    pub train_count: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    #[command(flatten)]
    pub hyper: Hyper,
    #[arg(long)]
    pub out_checkpoint: PathBuf,
    #[arg(long)]
    pub out_trajectory: PathBuf,
    /// `N × P` CSV dump of the final λ.
    #[arg(long)]
    pub out_lambda: PathBuf,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    configure_threads();
    let argv = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) else {
        return;
    };
    // a second call in one process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

pub fn execute(command: Command, argv: Vec<String>) -> Result<()> {
    match command {
        Command::Plant(a) => cmd_plant(&a, argv),
        Command::Sample(a) => cmd_sample(&a, argv),
        Command::Train(a) => cmd_train(&a, argv),
        Command::Eval(a) => cmd_eval(&a, argv),
        Command::Sweep(a) => cmd_sweep(&a, argv),
        Command::Mnist(a) => cmd_mnist(&a, argv),
    }
}

fn manifest<S: Serialize>(command: &str, argv: Vec<String>, settings: &S, seeds: Vec<u64>) -> Result<RunManifest> {
    let mut m = RunManifest::new(command, serde_json::to_value(settings)?, seeds);
    m.args = argv;
    Ok(m)
}

fn cmd_plant(a: &PlantArgs, argv: Vec<String>) -> Result<()> {
    let mut man = manifest("plant", argv, a, vec![a.seed])?;
    let model = PlantedModel::generate(ModelShape::new(a.n, a.p)?, a.c, a.beta, a.seed)?;
    container::write_model(&a.out, &model)?;
    println!("method: {}", serde_json::to_string(&model.method)?.trim_matches('"'));
    for (mu, nu, q) in model.pairwise_overlaps() {
        println!("q[{mu},{nu}] = {q}");
    }
    man.add_output(&a.out);
    man.finish(&a.out)?;
    Ok(())
}

fn cmd_sample(a: &SampleArgs, argv: Vec<String>) -> Result<()> {
    let mut man = manifest("sample", argv, a, vec![a.seed])?;
    man.add_input(&a.model)?;
    let model = container::read_model(&a.model)?;
    let cfg = GibbsConfig {
        burn_in: a.burnin,
        thinning: a.thin,
        n_samples: a.m,
    };
    let mut data = gibbs_sample(&model, &cfg, &mut RngHandle::new(a.seed).split("sample", 0))?;
    // record the seed a user passes, not the derived stream key
    data.meta.seed = Some(a.seed);
    container::write_dataset(&a.out, &data)?;
    man.add_output(&a.out);
    man.finish(&a.out)?;
    Ok(())
}

fn check_shape(ck: &Checkpoint, shape: ModelShape) -> Result<()> {
    let found = ck.lambda.shape();
    if found != shape {
        return Err(Error::Usage(format!(
            "checkpoint has shape {}×{}, expected {}×{}",
            found.n_visible, found.n_hidden, shape.n_visible, shape.n_hidden
        )));
    }
    Ok(())
}

/// Trains, writing the CSV (and optional JSONL) trajectory even when the
/// run aborts part-way.
fn train_with_outputs(
    trainer: Trainer<'_>,
    trajectory: &Path,
    jsonl: Option<&Path>,
) -> Result<(Checkpoint, Vec<TrajectoryRecord>)> {
    let mut csv = CsvTrajectory::new(Vec::new());
    let mut json = JsonlTrajectory::new(Vec::new());
    let mut records: Vec<TrajectoryRecord> = Vec::new();
    let outcome = {
        let mut sinks: Vec<&mut dyn binrbm_core::trainer::TrajectorySink> = vec![&mut csv, &mut records];
        if jsonl.is_some() {
            sinks.push(&mut json);
        }
        Trainer::run(trainer, &mut Tee(sinks))
    };
    write_atomic(trajectory, &csv.into_inner()?)?;
    if let Some(path) = jsonl {
        write_atomic(path, &json.into_inner())?;
    }
    Ok((outcome?, records))
}

fn trajectory_plot(records: &[TrajectoryRecord], n_params: usize) -> String {
    let pts = |f: &dyn Fn(&TrajectoryRecord) -> Option<f64>| -> Vec<(f64, f64)> {
        records.iter().filter_map(|r| f(r).map(|y| (r.step as f64, y))).collect()
    };
    let mut series = vec![
        Series {
            label: "LB per parameter".into(),
            points: pts(&|r| Some(r.report.per_param_lb)),
            errors: None,
        },
        Series {
            label: "KL per parameter".into(),
            points: pts(&|r| Some(r.report.kl_reg / n_params as f64)),
            errors: None,
        },
    ];
    if records.iter().any(|r| r.held_out.is_some()) {
        series.push(Series {
            label: "test LB per parameter".into(),
            points: pts(&|r| r.held_out.as_ref().map(|h| h.per_param_lb)),
            errors: None,
        });
    }
    line_plot("Training trajectory", "step", "per parameter", &series)
}

fn cmd_train(a: &TrainArgs, argv: Vec<String>) -> Result<()> {
    let cfg = a.hyper.config(1000);
    let settings = serde_json::json!({ "args": a, "config": cfg });
    let mut man = manifest("train", argv, &settings, vec![cfg.seed])?;
    man.add_input(&a.data)?;
    let data = container::read_dataset(&a.data)?;
    let shape = ModelShape::new(data.n_visible(), a.p)?;

    let prior = match &a.prior {
        Some(path) => {
            man.add_input(path)?;
            let ck = container::read_checkpoint(path)?;
            check_shape(&ck, shape)?;
            PriorMeans::new(shape, ck.lambda.into_matrix())?
        }
        None => PriorMeans::uniform(shape),
    };
    let init = match &a.init {
        Some(path) => {
            man.add_input(path)?;
            let ck = container::read_checkpoint(path)?;
            check_shape(&ck, shape)?;
            Some(ck.lambda)
        }
        None => None,
    };
    let planted = match &a.planted_model {
        Some(path) => {
            man.add_input(path)?;
            Some(container::read_model(path)?)
        }
        None => None,
    };
    let held_out = match &a.held_out {
        Some(path) => {
            man.add_input(path)?;
            Some(container::read_dataset(path)?)
        }
        None => None,
    };

    let mut trainer = Trainer::new(&data, &prior, cfg).with_init(init);
    if let Some(p) = &planted {
        trainer = trainer.with_planted(&p.weights);
    }
    if let Some(h) = &held_out {
        trainer = trainer.with_held_out(h);
    }
    let (ck, records) = train_with_outputs(trainer, &a.out_trajectory, a.jsonl.as_deref())?;
    container::write_checkpoint(&a.out_checkpoint, &ck)?;
    man.add_output(&a.out_checkpoint);
    man.add_output(&a.out_trajectory);
    if let Some(p) = &a.jsonl {
        man.add_output(p);
    }
    if let Some(p) = &a.plot {
        write_atomic(p, trajectory_plot(&records, shape.n_params()).as_bytes())?;
        man.add_output(p);
    }
    man.finish(&a.out_checkpoint)?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs, argv: Vec<String>) -> Result<()> {
    let mut man = manifest("eval", argv, a, Vec::new())?;
    man.add_input(&a.checkpoint)?;
    let ck = container::read_checkpoint(&a.checkpoint)?;
    man.seeds.push(ck.config.seed);
    let json = if let Some(path) = &a.planted_model {
        man.add_input(path)?;
        let model = container::read_model(path)?;
        let report = matched_overlap(&ck.lambda.decode(), &model.weights)?;
        serde_json::to_vec_pretty(&report)?
    } else {
        let path = a.data.as_ref().expect("clap enforces one target");
        man.add_input(path)?;
        let data = container::read_dataset(path)?;
        if data.n_visible() != ck.lambda.shape().n_visible {
            return Err(Error::Usage(format!(
                "dataset has N = {}, checkpoint has N = {}",
                data.n_visible(),
                ck.lambda.shape().n_visible
            )));
        }
        // the training run's evaluation stream, so eval on the training set
        // reproduces the last logged report
        let rng = RngHandle::new(ck.config.seed).split("evaluation", 0);
        let report = lower_bound(&ck.lambda, &ck.prior, &data, &ck.config, &rng)?;
        serde_json::to_vec_pretty(&report)?
    };
    write_atomic(&a.out, &json)?;
    println!("{}", String::from_utf8_lossy(&json));
    man.add_output(&a.out);
    man.finish(&a.out)?;
    Ok(())
}

/// One line of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub rep: usize,
    pub seed: u64,
    pub mean_q: f64,
    pub std_q: f64,
    pub q: Vec<f64>,
    pub status: String,
}

pub fn sweep_rows(a: &SweepArgs) -> Result<Vec<SweepRow>> {
    if a.alphas.is_empty() {
        return Err(Error::Core(binrbm_core::Error::InvalidConfig("alpha list is empty".into())));
    }
    if let Some(bad) = a.alphas.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Core(binrbm_core::Error::InvalidConfig(format!("alpha must be > 0, got {bad}"))));
    }
    if a.reps == 0 {
        return Err(Error::Core(binrbm_core::Error::InvalidConfig("reps must be >= 1".into())));
    }
    let base = a.hyper.config(1000);
    base.validate()?;
    let cells: Vec<(usize, usize)> = (0..a.alphas.len()).flat_map(|k| (0..a.reps).map(move |r| (k, r))).collect();
    Ok(cells
        .par_iter()
        .map(|&(k, rep)| {
            let alpha = a.alphas[k];
            let seed = cell_seed(a.hyper.seed, k, rep);
            let setup = PlantedSetup {
                n: a.n,
                p: a.p,
                correlation: a.c,
                beta: a.hyper.beta,
                alpha,
                burn_in: a.burnin,
                thinning: a.thin,
            };
            let cfg = TrainConfig {
                seed,
                log_every: base.steps.max(1),
                ..base.clone()
            };
            match planted_run(&setup, seed, &cfg, &mut binrbm_core::trainer::NullSink) {
                Ok(run) => {
                    let q = run.overlap.per_hidden_q;
                    let mean = q.iter().sum::<f64>() / q.len() as f64;
                    let var = q.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / q.len() as f64;
                    SweepRow {
                        alpha,
                        rep,
                        seed,
                        mean_q: run.overlap.mean_q,
                        std_q: var.sqrt(),
                        q,
                        status: "ok".into(),
                    }
                }
                Err(e) => SweepRow {
                    alpha,
                    rep,
                    seed,
                    mean_q: f64::NAN,
                    std_q: f64::NAN,
                    q: vec![f64::NAN; a.p],
                    status: format!("failed: {e}"),
                },
            }
        })
        .collect())
}

fn sweep_csv(rows: &[SweepRow], p: usize) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["alpha", "rep", "seed", "mean_q", "std_q"].iter().map(|s| s.to_string()).collect();
    header.extend((0..p).map(|mu| format!("q_{mu}")));
    header.push("status".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.alpha.to_string(), r.rep.to_string(), r.seed.to_string(), r.mean_q.to_string(), r.std_q.to_string()];
        rec.extend(r.q.iter().map(f64::to_string));
        rec.push(r.status.clone());
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Core(binrbm_core::Error::Sink(e.error().to_string())))
}

fn sweep_plot(a: &SweepArgs, rows: &[SweepRow]) -> String {
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for &alpha in &a.alphas {
        let qs: Vec<f64> = rows.iter().filter(|r| r.alpha == alpha && r.mean_q.is_finite()).map(|r| r.mean_q).collect();
        if qs.is_empty() {
            continue;
        }
        let mean = qs.iter().sum::<f64>() / qs.len() as f64;
        let sd = (qs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / qs.len() as f64).sqrt();
        points.push((alpha, mean));
        errors.push(sd);
    }
    let series = Series {
        label: format!("c = {}", a.c),
        points,
        errors: Some(errors),
    };
    line_plot("Planted recovery", "alpha = M/N", "mean Q", &[series])
}

fn cmd_sweep(a: &SweepArgs, argv: Vec<String>) -> Result<()> {
    let settings = serde_json::json!({ "args": a, "config": a.hyper.config(1000) });
    let mut man = manifest("sweep", argv, &settings, vec![a.hyper.seed])?;
    let rows = sweep_rows(a)?;
    write_atomic(&a.out_csv, &sweep_csv(&rows, a.p)?)?;
    man.add_output(&a.out_csv);
    for r in rows.iter().filter(|r| r.status != "ok") {
        eprintln!("alpha {} rep {}: {}", r.alpha, r.rep, r.status);
    }
    if let Some(p) = &a.plot {
        write_atomic(p, sweep_plot(a, &rows).as_bytes())?;
        man.add_output(p);
    }
    man.finish(&a.out_csv)?;
    Ok(())
}

/// `N × P` CSV, one row per visible unit.
pub fn lambda_csv(ck: &Checkpoint) -> Result<Vec<u8>> {
    let lam = ck.lambda.lambda();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["i".to_string()];
    header.extend((0..lam.cols()).map(|mu| format!("lambda_{mu}")));
    w.write_record(&header)?;
    for i in 0..lam.rows() {
        let mut rec = vec![i.to_string()];
        rec.extend(lam.row(i).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Core(binrbm_core::Error::Sink(e.error().to_string())))
}

/// Training and held-out halves of the first `limit` images.
pub fn mnist_split(all: &SpinDataset, train_count: Option<usize>) -> Result<(SpinDataset, SpinDataset)> {
    let m = all.len();
    let k = train_count.unwrap_or(m / 2);
    if k == 0 || k >= m {
        return Err(Error::Core(binrbm_core::Error::InvalidConfig(format!(
            "train count {k} leaves no training or test images out of {m}"
        ))));
    }
    let mut train = all.slice(0..k)?;
    let mut test = all.slice(k..m)?;
    train.meta.first_index = Some(0);
    test.meta.first_index = Some(k as u64);
    Ok((train, test))
}

fn cmd_mnist(a: &MnistArgs, argv: Vec<String>) -> Result<()> {
    let cfg = a.hyper.config(500);
    let settings = serde_json::json!({ "args": a, "config": cfg });
    let mut man = manifest("mnist", argv, &settings, vec![cfg.seed])?;
    let all = load_mnist(&a.images, Some(a.limit), a.threshold)?;
    man.add_input(&a.images)?;
    let (train, test) = mnist_split(&all, a.train_count)?;
    let shape = ModelShape::new(train.n_visible(), a.p)?;
    let prior = PriorMeans::uniform(shape);
    let trainer = Trainer::new(&train, &prior, cfg).with_held_out(&test);
    let (ck, records) = train_with_outputs(trainer, &a.out_trajectory, None)?;
    container::write_checkpoint(&a.out_checkpoint, &ck)?;
    write_atomic(&a.out_lambda, &lambda_csv(&ck)?)?;
    for p in [&a.out_checkpoint, &a.out_trajectory, &a.out_lambda] {
        man.add_output(p);
    }
    if let Some(p) = &a.plot {
        write_atomic(p, trajectory_plot(&records, shape.n_params()).as_bytes())?;
        man.add_output(p);
    }
    if let Some(last) = records.last() {
        println!(
            "step {}: train per-param LB {}, test per-param LB {}",
            last.step,
            last.report.per_param_lb,
            last.held_out.as_ref().map_or(f64::NAN, |h| h.per_param_lb)
        );
    }
    man.finish(&a.out_checkpoint)?;
    Ok(())
}
