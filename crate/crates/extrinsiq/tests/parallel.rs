use extrinsiq::parallel;
use extrinsiq_core::metrics::{random_init_sweep, sweep_inits, SweepOutcome};
use extrinsiq_core::pipeline::{calibrate_ppc, extract_features, PipelineOptions};
use extrinsiq_core::sim::{build_dataset, NoiseModel, SensorRig, SimConfig, TargetModel};

fn config() -> SimConfig {
    let mut c = SimConfig::noiseless(8, 12);
    c.noise.insert(
        "vlp_32".into(),
        NoiseModel {
            range_sigma: 0.01,
            pixel_sigma: 0.0,
            clutter_fraction: 0.1,
        },
    );
    c.noise.insert(
        "stereo_left".into(),
        NoiseModel {
            range_sigma: 0.0,
            pixel_sigma: 0.5,
            clutter_fraction: 0.0,
        },
    );
    c
}

#[test]
fn parallel_drivers_match_serial_ones() {
    let rig = SensorRig::default_rig();
    let target = TargetModel::default();
    let serial = build_dataset(&rig, &target, &config()).unwrap();
    let par = parallel::build_dataset(&rig, &target, &config()).unwrap();
    assert_eq!(par, serial);

    let opts = PipelineOptions::default();
    let f = extract_features(&serial, &opts);
    assert_eq!(parallel::extract_features(&serial, &opts), f);

    let inits = sweep_inits(8, 90.0, 0.5, 3).unwrap();
    let solve = |init: &_| {
        let c = calibrate_ppc(&serial, &f, "stereo_left", "vlp_32", init, &opts)?;
        Ok(SweepOutcome {
            pose: c.pose,
            cost: c.report.final_cost,
            converged: c.report.converged,
        })
    };
    assert_eq!(
        parallel::random_init_sweep(&inits, 1e-4, solve),
        random_init_sweep(&inits, 1e-4, solve)
    );
}
