//! Seeded end-to-end experiment runs.
//!
//! Every task writes two files into the configured output directory: a CSV
//! of metrics rows under a fixed header, and a JSON summary with the final
//! numbers a CI assertion would read. Nothing here consults the clock, the
//! environment, or any unseeded randomness, so rerunning a config with the
//! same seed reproduces both files byte for byte.

use std::fmt::Display;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use serde_json::json;

use crate::config::{ExperimentConfig, Task};
use crate::data::{self, Dataset, PIXEL_LEVELS};
use crate::error::Result;
use crate::hdc::{bind, cosine_similarity, permute, random_bipolar, ItemMemory};
use crate::learn::{AssociativeMemory, LabeledHv};
use crate::net::{alternating_optimize, baseline_uniform, AllocationResult, NetworkScenario};
use crate::protocol::{
    encode_dataset, fed_server_train, fl_hdc_baseline, main_server_train_encoded,
    parity_accuracy, ClientState, FedOutcome, FlOutcome, MainOutcome, ParityMap,
};
use crate::rng::{stream_rng, Stream};

/// Column layout of every metrics file. Learning rows fill the stage/epoch
/// block and leave the network block empty; network rows do the opposite,
/// with one aggregate row (empty `user`) per scenario and method followed by
/// one row per user.
pub const METRICS_HEADER: &str = "run_id,seed,task,stage,epoch,train_errors,accuracy,\
bandwidth_hz,max_power_w,method,max_time_s,user,power_w,user_bandwidth_hz,rate_bps,time_s";

#[derive(Debug, Clone, Default)]
struct Row {
    stage: Option<&'static str>,
    epoch: Option<usize>,
    train_errors: Option<usize>,
    accuracy: Option<f64>,
    bandwidth_hz: Option<f64>,
    max_power_w: Option<f64>,
    method: Option<&'static str>,
    max_time_s: Option<f64>,
    user: Option<usize>,
    power_w: Option<f64>,
    user_bandwidth_hz: Option<f64>,
    rate_bps: Option<f64>,
    time_s: Option<f64>,
}

fn cell<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Accumulates metrics rows for one run.
struct Metrics {
    run_id: String,
    seed: u64,
    task_name: String,
    text: String,
}

impl Metrics {
    fn new(task_name: &str, seed: u64) -> Self {
        Self {
            run_id: format!("{task_name}-seed{seed}"),
            seed,
            task_name: task_name.to_string(),
            text: format!("{METRICS_HEADER}\n"),
        }
    }

    fn push(&mut self, row: Row) {
        writeln!(
            self.text,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.seed,
            self.task_name,
            cell(row.stage),
            cell(row.epoch),
            cell(row.train_errors),
            cell(row.accuracy),
            cell(row.bandwidth_hz),
            cell(row.max_power_w),
            cell(row.method),
            cell(row.max_time_s),
            cell(row.user),
            cell(row.power_w),
            cell(row.user_bandwidth_hz),
            cell(row.rate_bps),
            cell(row.time_s),
        )
        .expect("writing to a String cannot fail");
    }
}

/// Where a run landed on disk, plus its parsed summary.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub run_id: String,
    pub metrics_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: serde_json::Value,
}

fn finish(
    cfg: &ExperimentConfig,
    metrics: Metrics,
    mut summary: serde_json::Value,
) -> Result<RunArtifacts> {
    if let serde_json::Value::Object(map) = &mut summary {
        map.insert("run_id".into(), json!(metrics.run_id));
        map.insert("task".into(), json!(metrics.task_name));
        map.insert("seed".into(), json!(metrics.seed));
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let metrics_path = cfg.out_dir.join(format!("{}.csv", metrics.run_id));
    fs::write(&metrics_path, &metrics.text)?;
    let summary_path = cfg.out_dir.join(format!("{}.summary.json", metrics.run_id));
    let rendered = serde_json::to_string_pretty(&summary).expect("JSON values serialize");
    fs::write(&summary_path, rendered + "\n")?;
    Ok(RunArtifacts {
        run_id: metrics.run_id,
        metrics_path,
        summary_path,
        summary,
    })
}

/// Everything the learning tasks derive from the raw datasets before any
/// training: the shared vector banks, the partitioned clients with their
/// encoded uploads, and the encoded main-server and test sets.
///
/// The client pool is a balanced seeded draw from the training set; the main
/// server's images are drawn from the rest, so no image appears on both
/// sides. The pool itself does not depend on the partition mode, only its
/// assignment to clients does.
pub struct EncodedWorld {
    pub item_memory: Arc<ItemMemory>,
    pub clients: Vec<ClientState>,
    /// Every client's encoded samples, concatenated in client order.
    pub uploads: Vec<LabeledHv>,
    pub encoded_main: Vec<LabeledHv>,
    pub encoded_test: Vec<LabeledHv>,
}

pub fn encode_world(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<EncodedWorld> {
    let item_memory = Arc::new(ItemMemory::generate(
        cfg.hv_dim,
        train.row_len(),
        PIXEL_LEVELS,
        cfg.master_seed,
        cfg.value_encoding,
    )?);
    let pool_ix = data::subsample_indices(train, cfg.pool_per_class(), cfg.master_seed)?;
    let pool = train.select(&pool_ix)?;
    let clients: Vec<ClientState> = data::partition(&pool, &cfg.partition_spec())?
        .into_iter()
        .enumerate()
        .map(|(client_id, data)| ClientState {
            client_id,
            data,
            item_memory: Arc::clone(&item_memory),
        })
        .collect();
    let main_ix = data::draw_indices_excluding(train, cfg.main_samples, &pool_ix, cfg.master_seed)?;
    let locals = train.select(&main_ix)?;

    let mut uploads = Vec::with_capacity(pool.len());
    for client in &clients {
        uploads.extend(client.encode(cfg.bipolarize_samples)?);
    }
    let encoded_main = encode_dataset(&locals, &item_memory, cfg.bipolarize_samples)?;
    let encoded_test = encode_dataset(test, &item_memory, cfg.bipolarize_samples)?;
    Ok(EncodedWorld {
        item_memory,
        clients,
        uploads,
        encoded_main,
        encoded_test,
    })
}

/// One full split-protocol run.
pub struct FslRun {
    pub fed: FedOutcome,
    pub main: MainOutcome,
    /// Parity test accuracy of the pipeline rebuilt from the fed model's
    /// snapshot after each fed retraining epoch; the convergence curve.
    pub fed_epoch_accuracy: Vec<f64>,
    /// Parity accuracy of the final broadcast model on the test set.
    pub test_accuracy: f64,
}

pub fn run_fsl(cfg: &ExperimentConfig, world: &EncodedWorld) -> Result<FslRun> {
    let map = ParityMap;
    let fed = fed_server_train(&world.uploads, cfg.fed_epochs, cfg.alpha, cfg.master_seed)?;
    // The last snapshot is the final fed model, so its pipeline result is
    // computed once and shared with the headline accuracy.
    let mut fed_epoch_accuracy = Vec::with_capacity(fed.epoch_smashed.len());
    let before_last = fed.epoch_smashed.len().saturating_sub(1);
    for snapshot in &fed.epoch_smashed[..before_last] {
        let out = main_server_train_encoded(
            snapshot,
            &world.encoded_main,
            map,
            cfg.main_epochs,
            cfg.alpha,
            cfg.weight_w,
            cfg.master_seed,
        )?;
        fed_epoch_accuracy.push(parity_accuracy(out.global.am(), &world.encoded_test, map)?);
    }
    let main = main_server_train_encoded(
        &fed.smashed,
        &world.encoded_main,
        map,
        cfg.main_epochs,
        cfg.alpha,
        cfg.weight_w,
        cfg.master_seed,
    )?;
    let test_accuracy = parity_accuracy(main.global.am(), &world.encoded_test, map)?;
    if !fed.epoch_smashed.is_empty() {
        fed_epoch_accuracy.push(test_accuracy);
    }
    Ok(FslRun {
        fed,
        main,
        fed_epoch_accuracy,
        test_accuracy,
    })
}

/// One pooled-baseline run. Consumes the uploads, which the baseline
/// relabels in place.
pub struct FlRun {
    pub outcome: FlOutcome,
    /// Parity test accuracy after each retraining epoch.
    pub epoch_accuracy: Vec<f64>,
    pub test_accuracy: f64,
}

pub fn run_fl(
    cfg: &ExperimentConfig,
    uploads: Vec<LabeledHv>,
    encoded_test: &[LabeledHv],
) -> Result<FlRun> {
    let map = ParityMap;
    let outcome = fl_hdc_baseline(uploads, map, cfg.fed_epochs, cfg.alpha, cfg.master_seed)?;
    let epoch_accuracy = outcome
        .epoch_models
        .iter()
        .map(|m| parity_accuracy(m, encoded_test, map))
        .collect::<Result<Vec<_>>>()?;
    let test_accuracy = match epoch_accuracy.last() {
        Some(&acc) => acc,
        None => parity_accuracy(&outcome.model, encoded_test, map)?,
    };
    Ok(FlRun {
        outcome,
        epoch_accuracy,
        test_accuracy,
    })
}

fn load_datasets(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let train = data::load_idx(&cfg.train_images, &cfg.train_labels)?;
    let test = data::load_idx(&cfg.test_images, &cfg.test_labels)?;
    Ok((train, test))
}

fn push_fsl_rows(m: &mut Metrics, run: &FslRun, fed_stage: &'static str, main_stage: &'static str) {
    for (i, (&errors, &accuracy)) in run
        .fed
        .epoch_errors
        .iter()
        .zip(&run.fed_epoch_accuracy)
        .enumerate()
    {
        m.push(Row {
            stage: Some(fed_stage),
            epoch: Some(i + 1),
            train_errors: Some(errors),
            accuracy: Some(accuracy),
            ..Row::default()
        });
    }
    for (i, &errors) in run.main.epoch_errors.iter().enumerate() {
        m.push(Row {
            stage: Some(main_stage),
            epoch: Some(i + 1),
            train_errors: Some(errors),
            accuracy: run.main.holdout_accuracy[i],
            ..Row::default()
        });
    }
}

fn push_fl_rows(m: &mut Metrics, run: &FlRun, stage: &'static str) {
    for (i, (&errors, &accuracy)) in run
        .outcome
        .epoch_errors
        .iter()
        .zip(&run.epoch_accuracy)
        .enumerate()
    {
        m.push(Row {
            stage: Some(stage),
            epoch: Some(i + 1),
            train_errors: Some(errors),
            accuracy: Some(accuracy),
            ..Row::default()
        });
    }
}

fn push_final_row(m: &mut Metrics, stage: &'static str, accuracy: f64) {
    m.push(Row {
        stage: Some(stage),
        accuracy: Some(accuracy),
        ..Row::default()
    });
}

fn task_fsl(cfg: &ExperimentConfig, m: &mut Metrics) -> Result<serde_json::Value> {
    let (train, test) = load_datasets(cfg)?;
    let world = encode_world(cfg, &train, &test)?;
    let run = run_fsl(cfg, &world)?;
    push_fsl_rows(m, &run, "fed", "main");
    push_final_row(m, "final", run.test_accuracy);
    Ok(json!({
        "fsl_accuracy": run.test_accuracy,
        "fed_epochs": run.fed.epoch_errors.len(),
        "fed_final_train_errors": run.fed.epoch_errors.last(),
        "main_epochs_run": run.main.epoch_errors.len(),
        "final_holdout_accuracy": run.main.holdout_accuracy.last().copied().flatten(),
        "partition": cfg.partition,
    }))
}

fn task_fl(cfg: &ExperimentConfig, m: &mut Metrics) -> Result<serde_json::Value> {
    let (train, test) = load_datasets(cfg)?;
    let world = encode_world(cfg, &train, &test)?;
    let run = run_fl(cfg, world.uploads, &world.encoded_test)?;
    push_fl_rows(m, &run, "fl");
    push_final_row(m, "final", run.test_accuracy);
    Ok(json!({
        "fl_accuracy": run.test_accuracy,
        "epochs": run.outcome.epoch_errors.len(),
        "final_train_errors": run.outcome.epoch_errors.last(),
        "partition": cfg.partition,
    }))
}

fn task_compare(cfg: &ExperimentConfig, m: &mut Metrics) -> Result<serde_json::Value> {
    let (train, test) = load_datasets(cfg)?;
    let world = encode_world(cfg, &train, &test)?;
    let fsl = run_fsl(cfg, &world)?;
    let fl = run_fl(cfg, world.uploads.clone(), &world.encoded_test)?;
    push_fsl_rows(m, &fsl, "fsl_fed", "fsl_main");
    push_fl_rows(m, &fl, "fl");
    push_final_row(m, "fsl_final", fsl.test_accuracy);
    push_final_row(m, "fl_final", fl.test_accuracy);
    Ok(json!({
        "fsl_accuracy": fsl.test_accuracy,
        "fl_accuracy": fl.test_accuracy,
        "delta_fl_minus_fsl": fl.test_accuracy - fsl.test_accuracy,
        "partition": cfg.partition,
    }))
}

/// Hypervector sanity checks at the configured dimension: near-orthogonality
/// of random pairs, permutation distance, exact self-inverse binding, and
/// exact conservation of the class-vector sum under an update pair.
fn task_hdc_unit(cfg: &ExperimentConfig, m: &mut Metrics) -> Result<serde_json::Value> {
    const TRIALS: usize = 100;
    let dim = cfg.hv_dim;
    let mut rng = stream_rng(cfg.master_seed, Stream::Diagnostics, &[]);

    let mut max_abs_cosine = 0.0f64;
    let mut cosine_outliers = 0usize;
    for _ in 0..TRIALS {
        let a = random_bipolar(dim, &mut rng)?;
        let b = random_bipolar(dim, &mut rng)?;
        let c = cosine_similarity(&a, &b)?.abs();
        max_abs_cosine = max_abs_cosine.max(c);
        if c >= 0.05 {
            cosine_outliers += 1;
        }
    }

    let mut hamming_sum = 0.0f64;
    let mut hamming_outliers = 0usize;
    for _ in 0..TRIALS {
        let h = random_bipolar(dim, &mut rng)?;
        let p = permute(&h, 1);
        let differing = h.iter().zip(&p).filter(|(a, b)| a != b).count();
        let frac = differing as f64 / dim as f64;
        hamming_sum += frac;
        if !(0.48..=0.52).contains(&frac) {
            hamming_outliers += 1;
        }
    }

    let mut bind_failures = 0usize;
    for _ in 0..TRIALS {
        let a = random_bipolar(dim, &mut rng)?;
        let b = random_bipolar(dim, &mut rng)?;
        if bind(&bind(&a, &b)?, &b)? != a {
            bind_failures += 1;
        }
    }

    let mut conservation_failures = 0usize;
    for _ in 0..TRIALS {
        let proto0 = random_bipolar(dim, &mut rng)?;
        let proto1 = random_bipolar(dim, &mut rng)?;
        let mut am = AssociativeMemory::from_class_hvs(vec![
            (0, proto0.iter().map(|&x| f64::from(x)).collect()),
            (1, proto1.iter().map(|&x| f64::from(x)).collect()),
        ])?;
        let sum_before: Vec<f64> = (0..dim)
            .map(|d| am.class_hv(0).unwrap()[d] + am.class_hv(1).unwrap()[d])
            .collect();
        // A class-1 lookalike labeled 0 forces a subtract/add update pair.
        let sample = LabeledHv {
            hv: proto1,
            label: 0,
        };
        am.retrain_epoch([&sample], cfg.alpha)?;
        let conserved = (0..dim)
            .all(|d| am.class_hv(0).unwrap()[d] + am.class_hv(1).unwrap()[d] == sum_before[d]);
        if !conserved {
            conservation_failures += 1;
        }
    }

    let rows = [
        ("orthogonality", cosine_outliers, max_abs_cosine),
        ("permutation", hamming_outliers, hamming_sum / TRIALS as f64),
        (
            "bind_inverse",
            bind_failures,
            (TRIALS - bind_failures) as f64 / TRIALS as f64,
        ),
        (
            "conservation",
            conservation_failures,
            (TRIALS - conservation_failures) as f64 / TRIALS as f64,
        ),
    ];
    for (stage, errors, accuracy) in rows {
        m.push(Row {
            stage: Some(stage),
            train_errors: Some(errors),
            accuracy: Some(accuracy),
            ..Row::default()
        });
    }
    Ok(json!({
        "trials": TRIALS,
        "hv_dim": dim,
        "max_abs_cosine": max_abs_cosine,
        "cosine_outliers": cosine_outliers,
        "mean_permutation_hamming": hamming_sum / TRIALS as f64,
        "hamming_outliers": hamming_outliers,
        "bind_failures": bind_failures,
        "conservation_failures": conservation_failures,
    }))
}

fn push_allocation_rows(
    m: &mut Metrics,
    s: &NetworkScenario,
    method: &'static str,
    alloc: &AllocationResult,
) {
    let shared = Row {
        bandwidth_hz: Some(s.total_bandwidth_hz),
        max_power_w: Some(s.max_power_w),
        method: Some(method),
        max_time_s: Some(alloc.max_time_s),
        ..Row::default()
    };
    m.push(shared.clone());
    for (user, u) in alloc.users.iter().enumerate() {
        m.push(Row {
            user: Some(user),
            power_w: Some(u.power_w),
            user_bandwidth_hz: Some(u.bandwidth_hz),
            rate_bps: Some(u.rate_bps),
            time_s: Some(u.time_s),
            ..shared.clone()
        });
    }
}

fn task_net_opt(cfg: &ExperimentConfig, m: &mut Metrics) -> Result<serde_json::Value> {
    let s = cfg.scenario()?;
    let uniform = baseline_uniform(&s)?;
    let joint = alternating_optimize(&s)?;
    push_allocation_rows(m, &s, "uniform", &uniform);
    push_allocation_rows(m, &s, "joint", &joint);
    Ok(json!({
        "num_users": s.num_users(),
        "bandwidth_hz": s.total_bandwidth_hz,
        "max_power_w": s.max_power_w,
        "uniform_time_s": uniform.max_time_s,
        "joint_time_s": joint.max_time_s,
        "improvement": (uniform.max_time_s - joint.max_time_s) / uniform.max_time_s,
    }))
}

fn task_net_sweep(cfg: &ExperimentConfig, m: &mut Metrics) -> Result<serde_json::Value> {
    let mut uniform_times = Vec::new();
    let mut joint_times = Vec::new();
    let mut improvements = Vec::new();
    for &bandwidth in &cfg.sweep_bandwidths_hz {
        let s = cfg.scenario_at(bandwidth)?;
        let uniform = baseline_uniform(&s)?;
        let joint = alternating_optimize(&s)?;
        push_allocation_rows(m, &s, "uniform", &uniform);
        push_allocation_rows(m, &s, "joint", &joint);
        uniform_times.push(uniform.max_time_s);
        joint_times.push(joint.max_time_s);
        improvements.push((uniform.max_time_s - joint.max_time_s) / uniform.max_time_s);
    }
    Ok(json!({
        "bandwidths_hz": cfg.sweep_bandwidths_hz,
        "uniform_times_s": uniform_times,
        "joint_times_s": joint_times,
        "improvements": improvements,
    }))
}

/// Runs the configured task and writes its metrics and summary files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let mut m = Metrics::new(cfg.task.name(), cfg.master_seed);
    let summary = match cfg.task {
        Task::FslHdc => task_fsl(cfg, &mut m)?,
        Task::FlHdc => task_fl(cfg, &mut m)?,
        Task::HdcUnit => task_hdc_unit(cfg, &mut m)?,
        Task::NetOpt => task_net_opt(cfg, &mut m)?,
        Task::NetSweep => task_net_sweep(cfg, &mut m)?,
    };
    finish(cfg, m, summary)
}

/// Runs the split pipeline and the pooled baseline on identical seeds,
/// partitions, and encodings, and reports both curves plus the accuracy
/// delta.
pub fn compare_methods(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let mut m = Metrics::new("compare", cfg.master_seed);
    let summary = task_compare(cfg, &mut m)?;
    finish(cfg, m, summary)
}
