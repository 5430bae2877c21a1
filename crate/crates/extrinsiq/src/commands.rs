//! The commands behind the command line. Each takes parsed settings and
//! writes its files into an output directory; summaries go to stdout and
//! warnings to stderr.

use std::path::{Path, PathBuf};

use extrinsiq_core::metrics::{
    pose_error, stereo_consistency, sweep_inits, MlreReport, SweepOutcome, SweepReport,
};
use extrinsiq_core::pipeline::{
    calibrate_msg_global, calibrate_msg_pairwise, calibrate_pbpc, calibrate_ppc, evaluate_mlre,
    FeatureSet, GlobalCalibration, Method, PairCalibration, PipelineOptions,
};
use extrinsiq_core::sim::Dataset;
use extrinsiq_core::Pose;
use serde::Serialize;

use crate::config::{env_seed, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::format::{
    read_calibration, read_dataset, to_compact_json, to_json, CalibrationFile, DatasetFile,
    GlobalResultDto, PairResultDto, PoseDto, TOOL, VERSION,
};
use crate::io;
use crate::parallel;
use crate::report::{cell, opt_cell, sample_std, write_table, Table};

pub const DATASET_FILE: &str = "dataset.json";

pub fn calibration_file_name(method: Method) -> String {
    format!("calib_{}.json", method.as_str())
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

/// Simulates the configured dataset and writes `dataset.json`.
pub fn gen(config: &ExperimentConfig) -> CliResult<Dataset> {
    let (rig, target, sim) = config.resolve()?;
    let ds = parallel::build_dataset(&rig, &target, &sim)?;
    io::write(
        &config.out.join(DATASET_FILE),
        &to_compact_json(&DatasetFile::new(&ds))?,
    )?;
    println!("{} views from seed {}", ds.observations.len(), sim.seed);
    print!("{}", covisibility(&ds).to_csv()?);
    Ok(ds)
}

/// Shared view counts between every two sensors.
pub fn covisibility(ds: &Dataset) -> Table {
    let names: Vec<&str> = ds.rig.sensors.iter().map(|s| s.name.as_str()).collect();
    let mut t = Table::new(std::iter::once("sensor").chain(names.iter().copied()));
    for a in 0..names.len() {
        let mut row = vec![names[a].to_string()];
        row.extend((0..names.len()).map(|b| ds.covisible(&[a, b]).len().to_string()));
        t.push(row);
    }
    t
}

pub fn load(dataset: &Path) -> CliResult<(Dataset, FeatureSet)> {
    let ds = read_dataset(dataset)?;
    let f = parallel::extract_features(&ds, &PipelineOptions::default());
    Ok((ds, f))
}

/// Which pairs to calibrate.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSelection {
    One(String, String),
    All,
}

/// Starting pose of every pairwise solve.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Identity,
    /// One draw from the sweep distribution (90 degrees, 0.5 m).
    Random,
    /// Pair poses read from an earlier calibration file.
    File(PathBuf),
}

impl Init {
    pub fn parse(s: &str) -> Self {
        match s {
            "identity" => Init::Identity,
            "random" => Init::Random,
            path => Init::File(PathBuf::from(path)),
        }
    }

    fn label(&self) -> String {
        match self {
            Init::Identity => "identity".into(),
            Init::Random => "random".into(),
            Init::File(p) => p.display().to_string(),
        }
    }
}

fn pair_dto(p: &PairCalibration) -> PairResultDto {
    PairResultDto {
        a: p.sensor_a.clone(),
        b: p.sensor_b.clone(),
        pose: (&p.pose).into(),
        converged: p.report.converged,
        iterations: p.report.iterations,
        initial_cost: p.report.initial_cost,
        final_cost: p.report.final_cost,
        termination: p.report.termination.as_str().into(),
    }
}

fn global_dto(g: &GlobalCalibration) -> GlobalResultDto {
    GlobalResultDto {
        sensors: g.sensors.clone(),
        nodes: g.nodes.iter().map(PoseDto::from).collect(),
        converged: g.report.converged,
        iterations: g.report.iterations,
        initial_cost: g.report.initial_cost,
        final_cost: g.report.final_cost,
        termination: g.report.termination.as_str().into(),
    }
}

/// Camera/LIDAR pairs of the rig, cameras first, in rig order.
pub fn camera_lidar_pairs(ds: &Dataset) -> Vec<(String, String)> {
    let s = &ds.rig.sensors;
    s.iter()
        .filter(|c| c.is_camera())
        .flat_map(|c| {
            s.iter()
                .filter(|l| l.is_lidar())
                .map(move |l| (c.name.clone(), l.name.clone()))
        })
        .collect()
}

fn solve_pair(
    ds: &Dataset,
    f: &FeatureSet,
    method: Method,
    a: &str,
    b: &str,
    init: &Pose,
    opts: &PipelineOptions,
) -> extrinsiq_core::Result<PairCalibration> {
    match method {
        Method::Ppc => calibrate_ppc(ds, f, a, b, init, opts),
        Method::Pbpc => calibrate_pbpc(ds, f, a, b, init, opts),
        Method::Msg => calibrate_msg_pairwise(ds, f, a, b, init, opts).map(|x| x.0),
    }
}

/// Runs one method over the selected pairs and writes `calib_<method>.json`.
/// Msg over all pairs solves every pair, then the global graph, and stores
/// every extrinsic derived from the graph. The file is written before a
/// non-converged solve is reported as an error.
pub fn calibrate(
    dataset: &Path,
    method: Method,
    pairs: &PairSelection,
    init: &Init,
    seed: Option<u64>,
    out: &Path,
) -> CliResult<CalibrationFile> {
    let (ds, f) = load(dataset)?;
    let opts = PipelineOptions::default();
    let seed = match seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(ds.config.seed),
    };
    let from_file = match init {
        Init::File(p) => Some(read_calibration(p)?),
        _ => None,
    };
    let start = |a: &str, b: &str| -> CliResult<Pose> {
        match init {
            Init::Identity => Ok(Pose::identity()),
            Init::Random => Ok(sweep_inits(1, 90.0, 0.5, seed)?[0]),
            Init::File(p) => from_file
                .as_ref()
                .expect("read above")
                .extrinsic(a, b)?
                .ok_or_else(|| CliError::Usage(format!("{} has no pose for {a}:{b}", p.display()))),
        }
    };
    let mut file = CalibrationFile {
        method: method.as_str().into(),
        init: init.label(),
        dataset_seed: ds.config.seed,
        pairs: Vec::new(),
        pairwise: Vec::new(),
        global: None,
        tool: TOOL.into(),
        version: VERSION.into(),
    };
    let mut converged = true;
    match (method, pairs) {
        (Method::Msg, PairSelection::All) => {
            if *init != Init::Identity {
                warn("msg over all pairs starts its pairwise solves from the identity; --init is ignored");
                file.init = Init::Identity.label();
            }
            let names: Vec<&str> = ds.rig.sensors.iter().map(|s| s.name.as_str()).collect();
            let g = calibrate_msg_global(&ds, &f, &names, &opts)?;
            converged &= g.report.converged;
            file.pairs = g.derived_pairs().iter().map(pair_dto).collect();
            file.pairwise = g.pairwise.iter().map(pair_dto).collect();
            file.global = Some(global_dto(&g));
        }
        (_, sel) => {
            let list = match sel {
                PairSelection::One(a, b) => vec![(a.clone(), b.clone())],
                PairSelection::All => camera_lidar_pairs(&ds),
            };
            for (a, b) in &list {
                let cal = solve_pair(&ds, &f, method, a, b, &start(a, b)?, &opts)?;
                converged &= cal.report.converged;
                file.pairs.push(pair_dto(&cal));
            }
        }
    }
    io::write(&out.join(calibration_file_name(method)), &to_json(&file)?)?;
    for p in &file.pairs {
        println!(
            "{} {}_from_{}: {} after {} iterations, cost {}",
            file.method, p.a, p.b, p.termination, p.iterations, p.final_cost
        );
    }
    if !converged {
        return Err(CliError::NotConverged(format!(
            "{} calibration",
            file.method
        )));
    }
    Ok(file)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MlreDetail {
    pub camera: String,
    pub lidar: String,
    pub method: String,
    pub mean: f64,
    pub point_mean: f64,
    pub per_frame: Vec<Option<f64>>,
    pub per_line: Vec<Vec<Option<f64>>>,
    pub points: usize,
    pub skipped: usize,
}

impl MlreDetail {
    fn new(camera: &str, lidar: &str, method: &str, r: MlreReport) -> Self {
        Self {
            camera: camera.into(),
            lidar: lidar.into(),
            method: method.into(),
            mean: r.mean,
            point_mean: r.point_mean,
            per_frame: r.per_frame,
            per_line: r.per_line,
            points: r.points,
            skipped: r.skipped,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalOutput {
    pub mlre: Table,
    pub stereo: Option<Table>,
    pub pose_error: Table,
}

/// Column labels for a list of results: the method name, with `_2`, `_3`
/// appended to repeats.
fn labels(results: &[CalibrationFile]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in results {
        let n = out
            .iter()
            .filter(|l| *l == &r.method || l.starts_with(&format!("{}_", r.method)))
            .count();
        out.push(if n == 0 {
            r.method.clone()
        } else {
            format!("{}_{}", r.method, n + 1)
        });
    }
    out
}

fn check_sensors(ds: &Dataset, r: &CalibrationFile, path: &Path) -> CliResult<()> {
    for p in &r.pairs {
        for s in [&p.a, &p.b] {
            if ds.rig.sensor(s).is_err() {
                return Err(CliError::Format(format!(
                    "{} refers to `{s}`, which the dataset does not have",
                    path.display()
                )));
            }
        }
    }
    Ok(())
}

/// MLRE, stereo consistency and pose error of each result against the
/// dataset; writes `mlre.csv`, `stereo.csv` and `pose_error.csv`.
pub fn eval(dataset: &Path, results: &[PathBuf], out: &Path, json: bool) -> CliResult<EvalOutput> {
    let ds = read_dataset(dataset)?;
    let files = results
        .iter()
        .map(|p| read_calibration(p))
        .collect::<CliResult<Vec<_>>>()?;
    for (r, p) in files.iter().zip(results) {
        check_sensors(&ds, r, p)?;
    }
    let labels = labels(&files);
    let mlre = mlre_table(&ds, &files, &labels)?;
    write_table(out, "mlre", &mlre.0, Some(&mlre.1), json)?;
    print!("{}", mlre.0.to_csv()?);

    let stereo = if ds.rig.stereo_pairs.is_empty() {
        warn("the rig declares no stereo pair; stereo table skipped");
        None
    } else {
        let t = stereo_table(&ds, &files, &labels)?;
        write_table::<()>(out, "stereo", &t, None, json)?;
        Some(t)
    };

    let pose = pose_error_table(&ds, &files, &labels)?;
    write_table::<()>(out, "pose_error", &pose, None, json)?;
    Ok(EvalOutput {
        mlre: mlre.0,
        stereo,
        pose_error: pose,
    })
}

fn mlre_table(
    ds: &Dataset,
    files: &[CalibrationFile],
    labels: &[String],
) -> CliResult<(Table, Vec<MlreDetail>)> {
    let mut t = Table::new(
        ["camera", "lidar"]
            .into_iter()
            .map(String::from)
            .chain(labels.iter().cloned()),
    );
    let mut details = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); files.len()];
    for (cam, lidar) in camera_lidar_pairs(ds) {
        let mut row = vec![cam.clone(), lidar.clone()];
        let mut any = false;
        for (i, f) in files.iter().enumerate() {
            let Some(pose) = f.extrinsic(&cam, &lidar)? else {
                row.push(String::new());
                continue;
            };
            any = true;
            let r = evaluate_mlre(ds, &cam, &lidar, &pose)?;
            columns[i].push(r.mean);
            row.push(cell(r.mean));
            details.push(MlreDetail::new(&cam, &lidar, &labels[i], r));
        }
        if any {
            t.push(row);
        }
    }
    let mut row = vec!["standard_deviation".to_string(), String::new()];
    row.extend(columns.iter().map(|c| opt_cell(sample_std(c))));
    t.push(row);
    Ok((t, details))
}

const STEREO_METRICS: [&str; 6] = ["alpha_deg", "beta_deg", "gamma_deg", "x_m", "y_m", "z_m"];

fn stereo_table(ds: &Dataset, files: &[CalibrationFile], labels: &[String]) -> CliResult<Table> {
    let head = ["left", "right", "lidar", "metric"]
        .into_iter()
        .map(String::from);
    let mut t = Table::new(head.chain(labels.iter().cloned()));
    for sp in &ds.rig.stereo_pairs {
        for lidar in ds.rig.sensors.iter().filter(|s| s.is_lidar()) {
            let mut cols = Vec::new();
            for f in files {
                let e = match (
                    f.extrinsic(&sp.left, &lidar.name)?,
                    f.extrinsic(&sp.right, &lidar.name)?,
                ) {
                    (Some(c1), Some(c2)) => {
                        Some(stereo_consistency(&c1, &c2, &sp.left_from_right)?)
                    }
                    _ => None,
                };
                cols.push(e.map(|e| [e.alpha, e.beta, e.gamma, e.x, e.y, e.z]));
            }
            if cols.iter().all(Option::is_none) {
                continue;
            }
            for (m, metric) in STEREO_METRICS.iter().enumerate() {
                let mut row = vec![
                    sp.left.clone(),
                    sp.right.clone(),
                    lidar.name.clone(),
                    metric.to_string(),
                ];
                row.extend(cols.iter().map(|c| opt_cell(c.map(|v| v[m]))));
                t.push(row);
            }
        }
    }
    Ok(t)
}

fn pose_error_table(
    ds: &Dataset,
    files: &[CalibrationFile],
    labels: &[String],
) -> CliResult<Table> {
    let head = ["a", "b", "metric"].into_iter().map(String::from);
    let mut t = Table::new(head.chain(labels.iter().cloned()));
    let names: Vec<&str> = ds.rig.sensors.iter().map(|s| s.name.as_str()).collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let truth = ds.rig.extrinsic(a, b)?;
            let errs = files
                .iter()
                .map(|f| Ok(f.extrinsic(a, b)?.map(|p| pose_error(&p, &truth))))
                .collect::<CliResult<Vec<_>>>()?;
            if errs.iter().all(Option::is_none) {
                continue;
            }
            for (m, metric) in ["rotation_deg", "translation_m"].iter().enumerate() {
                let mut row = vec![a.to_string(), b.to_string(), metric.to_string()];
                row.extend(
                    errs.iter()
                        .map(|e| opt_cell(e.map(|e| if m == 0 { e.0 } else { e.1 }))),
                );
                t.push(row);
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSettings {
    pub method: Method,
    pub a: String,
    pub b: String,
    pub trials: usize,
    pub sigma_rot_deg: f64,
    pub sigma_t: f64,
    pub seed: Option<u64>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub size: usize,
    pub representative: [f64; 6],
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub method: String,
    pub a: String,
    pub b: String,
    pub seed: u64,
    pub trials: usize,
    pub failed: usize,
    pub modal: usize,
    pub divergent: usize,
    pub clusters: Vec<ClusterSummary>,
}

/// Random-initialization sweep over one pair; writes `sweep_<method>.csv`.
/// Per-trial failures are recorded, not raised.
pub fn sweep(
    dataset: &Path,
    s: &SweepSettings,
    out: &Path,
    json: bool,
) -> CliResult<(SweepReport, SweepSummary)> {
    let (ds, f) = load(dataset)?;
    ds.rig.sensor(&s.a)?;
    ds.rig.sensor(&s.b)?;
    if s.trials == 0 {
        return Err(CliError::Usage("a sweep needs at least one trial".into()));
    }
    let seed = match s.seed {
        Some(x) => x,
        None => env_seed()?.unwrap_or(ds.config.seed),
    };
    let inits = sweep_inits(s.trials, s.sigma_rot_deg, s.sigma_t, seed)?;
    let opts = PipelineOptions::default();
    let report = parallel::random_init_sweep(&inits, s.tolerance, |init| {
        let cal = solve_pair(&ds, &f, s.method, &s.a, &s.b, init, &opts)?;
        Ok(SweepOutcome {
            pose: cal.pose,
            cost: cal.report.final_cost,
            converged: cal.report.converged,
        })
    });
    let table = sweep_table(&report);
    let summary = SweepSummary {
        method: s.method.as_str().into(),
        a: s.a.clone(),
        b: s.b.clone(),
        seed,
        trials: report.trials.len(),
        failed: report.trials.iter().filter(|t| t.result.is_none()).count(),
        modal: report.modal_count(),
        divergent: report.divergent_count(),
        clusters: report
            .clusters
            .iter()
            .map(|c| ClusterSummary {
                size: c.members.len(),
                representative: c.representative.to_vector(),
                members: c.members.clone(),
            })
            .collect(),
    };
    write_table(
        out,
        &format!("sweep_{}", s.method.as_str()),
        &table,
        Some(&summary),
        json,
    )?;
    println!(
        "{} {}:{}: {} trials, {} clusters, {} in the modal cluster, {} divergent, {} failed",
        summary.method,
        s.a,
        s.b,
        summary.trials,
        summary.clusters.len(),
        summary.modal,
        summary.divergent,
        summary.failed
    );
    for (i, c) in summary.clusters.iter().enumerate() {
        let v: Vec<String> = c.representative.iter().map(|x| cell(*x)).collect();
        println!("cluster {i}: {} trials at [{}]", c.size, v.join(", "));
    }
    Ok((report, summary))
}

const SIX: [&str; 6] = ["rx", "ry", "rz", "tx", "ty", "tz"];

pub fn sweep_table(report: &SweepReport) -> Table {
    let mut head = vec!["trial".to_string()];
    head.extend(SIX.iter().map(|c| format!("init_{c}")));
    head.extend(SIX.iter().map(|c| format!("final_{c}")));
    head.extend(["cost", "converged", "cluster", "error"].map(String::from));
    let mut t = Table::new(head);
    for (i, trial) in report.trials.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(trial.init.to_vector().iter().map(|x| cell(*x)));
        match &trial.result {
            Some(r) => {
                row.extend(r.pose.to_vector().iter().map(|x| cell(*x)));
                row.push(cell(r.cost));
                row.push(r.converged.to_string());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push("false".into());
            }
        }
        let cluster = report.clusters.iter().position(|c| c.members.contains(&i));
        row.push(cluster.map(|c| c.to_string()).unwrap_or_default());
        row.push(
            trial
                .error
                .as_ref()
                .map(|e| e.to_string())
                .unwrap_or_default(),
        );
        t.push(row);
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    pub camera: String,
    pub lidar: String,
    pub with: f64,
    pub without: f64,
}

/// MSG over the whole rig and again without `drop`, compared by MLRE on
/// every remaining camera/LIDAR pair; writes `ablation.csv`. `delta` is
/// `without - with`, so negative values are improvements.
pub fn ablate(dataset: &Path, drop: &str, out: &Path, json: bool) -> CliResult<Vec<AblationRow>> {
    let (ds, f) = load(dataset)?;
    let rows = ablation(&ds, &f, drop)?;
    let mut t = Table::new(["camera", "lidar", "with", "without", "delta"]);
    for r in &rows {
        t.push(vec![
            r.camera.clone(),
            r.lidar.clone(),
            cell(r.with),
            cell(r.without),
            cell(r.without - r.with),
        ]);
    }
    write_table(out, "ablation", &t, Some(&rows), json)?;
    print!("{}", t.to_csv()?);
    Ok(rows)
}

/// The ablation on an already extracted dataset.
pub fn ablation(ds: &Dataset, f: &FeatureSet, drop: &str) -> CliResult<Vec<AblationRow>> {
    let (d, _) = ds.rig.sensor(drop)?;
    let opts = PipelineOptions::default();
    let all: Vec<&str> = ds.rig.sensors.iter().map(|s| s.name.as_str()).collect();
    let kept: Vec<&str> = all.iter().copied().filter(|s| *s != drop).collect();
    let shares = (0..all.len()).any(|o| o != d && !ds.covisible(&[d, o]).is_empty());
    let without = calibrate_msg_global(ds, f, &kept, &opts)?;
    let with = if shares {
        calibrate_msg_global(ds, f, &all, &opts)?
    } else {
        warn(&format!(
            "`{drop}` shares no view with another sensor; dropping it changes nothing"
        ));
        without.clone()
    };
    let mut rows = Vec::new();
    for (cam, lidar) in camera_lidar_pairs(ds) {
        if cam == drop || lidar == drop {
            continue;
        }
        let w = evaluate_mlre(ds, &cam, &lidar, &with.extrinsic(&cam, &lidar)?)?.mean;
        let wo = evaluate_mlre(ds, &cam, &lidar, &without.extrinsic(&cam, &lidar)?)?.mean;
        rows.push(AblationRow {
            camera: cam,
            lidar,
            with: w,
            without: wo,
        });
    }
    if rows.is_empty() {
        warn(&format!("no camera/LIDAR pair remains without `{drop}`"));
    }
    Ok(rows)
}

/// A whole experiment from one configuration: dataset, every configured
/// method over all pairs, evaluation, and the sweep when a pair is set.
pub fn run(config: &ExperimentConfig, json: bool) -> CliResult<()> {
    let methods = config.methods()?;
    gen(config)?;
    let data = config.out.join(DATASET_FILE);
    let mut results = Vec::new();
    for &m in &methods {
        calibrate(
            &data,
            m,
            &PairSelection::All,
            &Init::Identity,
            None,
            &config.out,
        )?;
        results.push(config.out.join(calibration_file_name(m)));
    }
    eval(&data, &results, &config.out, json)?;
    if let Some(pair) = &config.sweep.pair {
        let (a, b) = crate::config::parse_pair(pair)?;
        for &method in &methods {
            let s = SweepSettings {
                method,
                a: a.clone(),
                b: b.clone(),
                trials: config.sweep.trials,
                sigma_rot_deg: config.sweep.sigma_rot_deg,
                sigma_t: config.sweep.sigma_t,
                seed: Some(config.seed),
                tolerance: config.sweep.tolerance,
            };
            sweep(&data, &s, &config.out, json)?;
        }
    }
    Ok(())
}
