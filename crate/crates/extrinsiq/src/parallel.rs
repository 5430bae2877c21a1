//! Rayon versions of the per-observation and per-trial loops. Every item
//! draws from its own seeded stream, so results match the serial functions
//! exactly and do not depend on the thread count.

use extrinsiq_core::metrics::{cluster_trials, sweep_trial, SweepOutcome, SweepReport, SweepTrial};
use extrinsiq_core::pipeline::{extract_view, FeatureSet, PipelineOptions};
use extrinsiq_core::sim::{
    plan_poses, simulate_observation, Dataset, SensorRig, SimConfig, TargetModel,
};
use extrinsiq_core::{Pose, Result};
use rayon::prelude::*;

pub fn build_dataset(rig: &SensorRig, target: &TargetModel, config: &SimConfig) -> Result<Dataset> {
    let poses = plan_poses(rig, target, config)?;
    let observations = poses
        .par_iter()
        .enumerate()
        .map(|(i, p)| simulate_observation(rig, target, config, i, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        rig: rig.clone(),
        target: *target,
        config: config.clone(),
        observations,
    })
}

pub fn extract_features(dataset: &Dataset, opts: &PipelineOptions) -> FeatureSet {
    FeatureSet {
        views: (0..dataset.observations.len())
            .into_par_iter()
            .map(|v| extract_view(dataset, v, opts))
            .collect(),
    }
}

pub fn random_init_sweep<F>(inits: &[Pose], tolerance: f64, solve: F) -> SweepReport
where
    F: Fn(&Pose) -> Result<SweepOutcome> + Sync,
{
    let trials: Vec<SweepTrial> = inits
        .par_iter()
        .map(|init| sweep_trial(init, &mut &solve))
        .collect();
    let clusters = cluster_trials(&trials, tolerance);
    SweepReport { trials, clusters }
}
