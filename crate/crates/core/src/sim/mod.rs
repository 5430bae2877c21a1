//! Feature-level simulation of a planar target seen by a multi-sensor rig.
//!
//! The rig frame uses +x forward, +y left, +z up. Each sensor stores its pose
//! in the rig (`rig_from_sensor`). A target pose is `rig_from_target`, with the
//! target's +z axis facing the rig.

mod camera;
mod dataset;
mod lidar;
mod poses;
mod rig;
mod target;

pub use camera::simulate_camera_view;
pub use dataset::{
    build_dataset, plan_poses, simulate_observation, CameraObservation, Dataset, EdgePoint,
    LidarObservation, NoiseModel, Observation, SensorObservation, SimConfig,
};
pub use lidar::simulate_lidar_scan;
pub use poses::{sample_target_poses, MAX_POSE_ATTEMPTS_PER_VIEW};
pub use rig::{ScanPattern, Sensor, SensorKind, SensorRig, StereoPair};
pub use target::TargetModel;
