//! Plant → sample → train pipelines shared by the sweep command and tests.

use binrbm_core::metrics::{matched_overlap, OverlapReport};
use binrbm_core::planted::{gibbs_sample, GibbsConfig, PlantedModel};
use binrbm_core::trainer::{Checkpoint, TrajectorySink, Trainer};
use binrbm_core::{ModelShape, PriorMeans, RngHandle, SpinDataset, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One planted-recovery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSetup {
    pub n: usize,
    pub p: usize,
    pub correlation: f64,
    pub beta: f64,
    /// `M = round(α N)`.
    pub alpha: f64,
    pub burn_in: usize,
    pub thinning: usize,
}

impl PlantedSetup {
    pub fn n_samples(&self) -> usize {
        (self.alpha * self.n as f64).round() as usize
    }
}

pub struct PlantedRun {
    pub model: PlantedModel,
    pub data: SpinDataset,
    pub checkpoint: Checkpoint,
    pub overlap: OverlapReport,
}

/// Plants with `seed`, samples from its `"sample"` sub-stream and trains
/// with `train` (whose own seed drives initialization and field samples).
pub fn planted_run(
    setup: &PlantedSetup,
    seed: u64,
    train: &TrainConfig,
    sink: &mut dyn TrajectorySink,
) -> Result<PlantedRun> {
    let shape = ModelShape::new(setup.n, setup.p)?;
    let model = PlantedModel::generate(shape, setup.correlation, setup.beta, seed)?;
    let gibbs = GibbsConfig {
        burn_in: setup.burn_in,
        thinning: setup.thinning,
        n_samples: setup.n_samples(),
    };
    let data = gibbs_sample(&model, &gibbs, &mut RngHandle::new(seed).split("sample", 0))?;
    let checkpoint = Trainer::new(&data, &PriorMeans::uniform(shape), train.clone())
        .with_planted(&model.weights)
        .run(sink)?;
    let overlap = matched_overlap(&checkpoint.lambda.decode(), &model.weights)?;
    Ok(PlantedRun {
        model,
        data,
        checkpoint,
        overlap,
    })
}

/// Seed of replicate `rep` at grid point `cell`, independent of scheduling.
pub fn cell_seed(master: u64, cell: usize, rep: usize) -> u64 {
    RngHandle::new(master)
        .split("sweep-cell", ((cell as u64) << 32) | rep as u64)
        .key()
}
