//! Experiment configuration: a flat key/value TOML file.
//!
//! Every key except `hv_dim` has a default, so a minimal file is one line;
//! unknown keys are rejected outright because a silently ignored typo in an
//! experiment config corrupts a reproduction. Command-line `KEY=VALUE`
//! overrides are merged before validation, so flags win over the file and
//! the file wins over defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::data::{PartitionMode, PartitionSpec};
use crate::error::{Error, Result};
use crate::hdc::ValueEncoding;
use crate::net::{ChannelParams, NetworkScenario};

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Full split pipeline: clients -> fed server -> main server -> broadcast.
    FslHdc,
    /// Pooled-upload baseline trained directly on the parity task.
    FlHdc,
    /// Hypervector diagnostics: orthogonality, permutation distance,
    /// self-inverse binding, update conservation.
    HdcUnit,
    /// One uplink scenario, uniform baseline vs joint optimization.
    NetOpt,
    /// The uplink comparison swept over total bandwidth.
    NetSweep,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::FslHdc => "fsl_hdc",
            Task::FlHdc => "fl_hdc",
            Task::HdcUnit => "hdc_unit",
            Task::NetOpt => "net_opt",
            Task::NetSweep => "net_sweep",
        }
    }
}

/// One experiment, fully specified. Together with the dataset files this
/// determines every byte of the run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "d_task")]
    pub task: Task,
    /// Hypervector dimensionality. The one key every config file must state.
    pub hv_dim: usize,
    #[serde(default = "d_value_encoding")]
    pub value_encoding: ValueEncoding,
    #[serde(default = "d_master_seed")]
    pub master_seed: u64,
    #[serde(default = "d_out_dir")]
    pub out_dir: PathBuf,

    #[serde(default = "d_train_images")]
    pub train_images: PathBuf,
    #[serde(default = "d_train_labels")]
    pub train_labels: PathBuf,
    #[serde(default = "d_test_images")]
    pub test_images: PathBuf,
    #[serde(default = "d_test_labels")]
    pub test_labels: PathBuf,

    #[serde(default = "d_num_clients")]
    pub num_clients: usize,
    /// Images of every digit per client; each client holds 10x this many.
    #[serde(default = "d_per_class_per_client")]
    pub per_class_per_client: usize,
    /// Size of the main server's own dataset, drawn disjoint from the
    /// client pool.
    #[serde(default = "d_main_samples")]
    pub main_samples: usize,
    #[serde(default = "d_partition")]
    pub partition: PartitionMode,
    /// Shards dealt to each client in `noniid_shards` mode.
    #[serde(default = "d_shards_per_client")]
    pub shards_per_client: usize,

    #[serde(default = "d_fed_epochs")]
    pub fed_epochs: usize,
    /// Upper bound on main-server retraining epochs; early stopping usually
    /// ends sooner.
    #[serde(default = "d_main_epochs")]
    pub main_epochs: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    /// Weight of the smashed class vectors against the main server's own
    /// sample vectors when composing the parity model.
    #[serde(default = "d_weight_w")]
    pub weight_w: f64,
    #[serde(default = "d_bipolarize_samples")]
    pub bipolarize_samples: bool,

    #[serde(default = "d_num_users")]
    pub num_users: usize,
    /// Explicit user distances in meters; empty means: place users uniformly
    /// at random in the square area, seeded by `master_seed`.
    #[serde(default)]
    pub distances_m: Vec<f64>,
    #[serde(default = "d_total_bandwidth_hz")]
    pub total_bandwidth_hz: f64,
    #[serde(default = "d_max_power_w")]
    pub max_power_w: f64,
    #[serde(default = "d_energy_budget_j")]
    pub energy_budget_j: f64,
    #[serde(default = "d_payload_bits")]
    pub payload_bits: f64,
    #[serde(default = "d_carrier_freq_hz")]
    pub carrier_freq_hz: f64,
    #[serde(default = "d_area_side_m")]
    pub area_side_m: f64,
    /// Bandwidth grid for the `net_sweep` task, Hz.
    #[serde(default = "d_sweep_bandwidths_hz")]
    pub sweep_bandwidths_hz: Vec<f64>,
}

fn d_task() -> Task {
    Task::FslHdc
}
fn d_value_encoding() -> ValueEncoding {
    ValueEncoding::Level
}
fn d_master_seed() -> u64 {
    0
}
fn d_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn d_train_images() -> PathBuf {
    PathBuf::from("data/mnist/train-images-idx3-ubyte.gz")
}
fn d_train_labels() -> PathBuf {
    PathBuf::from("data/mnist/train-labels-idx1-ubyte.gz")
}
fn d_test_images() -> PathBuf {
    PathBuf::from("data/mnist/t10k-images-idx3-ubyte.gz")
}
fn d_test_labels() -> PathBuf {
    PathBuf::from("data/mnist/t10k-labels-idx1-ubyte.gz")
}
fn d_num_clients() -> usize {
    10
}
fn d_per_class_per_client() -> usize {
    60
}
fn d_main_samples() -> usize {
    2000
}
fn d_partition() -> PartitionMode {
    PartitionMode::Iid
}
fn d_shards_per_client() -> usize {
    2
}
fn d_fed_epochs() -> usize {
    15
}
fn d_main_epochs() -> usize {
    30
}
fn d_alpha() -> f64 {
    1.0
}
fn d_weight_w() -> f64 {
    1.0
}
fn d_bipolarize_samples() -> bool {
    true
}
fn d_num_users() -> usize {
    10
}
fn d_total_bandwidth_hz() -> f64 {
    100e6
}
fn d_max_power_w() -> f64 {
    1.0
}
fn d_energy_budget_j() -> f64 {
    5.0
}
fn d_payload_bits() -> f64 {
    6e6
}
fn d_carrier_freq_hz() -> f64 {
    28e9
}
fn d_area_side_m() -> f64 {
    200.0
}
fn d_sweep_bandwidths_hz() -> Vec<f64> {
    vec![100e6, 200e6, 300e6, 400e6, 500e6]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: d_task(),
            hv_dim: 10000,
            value_encoding: d_value_encoding(),
            master_seed: d_master_seed(),
            out_dir: d_out_dir(),
            train_images: d_train_images(),
            train_labels: d_train_labels(),
            test_images: d_test_images(),
            test_labels: d_test_labels(),
            num_clients: d_num_clients(),
            per_class_per_client: d_per_class_per_client(),
            main_samples: d_main_samples(),
            partition: d_partition(),
            shards_per_client: d_shards_per_client(),
            fed_epochs: d_fed_epochs(),
            main_epochs: d_main_epochs(),
            alpha: d_alpha(),
            weight_w: d_weight_w(),
            bipolarize_samples: d_bipolarize_samples(),
            num_users: d_num_users(),
            distances_m: Vec::new(),
            total_bandwidth_hz: d_total_bandwidth_hz(),
            max_power_w: d_max_power_w(),
            energy_budget_j: d_energy_budget_j(),
            payload_bits: d_payload_bits(),
            carrier_freq_hz: d_carrier_freq_hz(),
            area_side_m: d_area_side_m(),
            sweep_bandwidths_hz: d_sweep_bandwidths_hz(),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Parses `KEY=VALUE` into a TOML key and value. Values are read as TOML
/// first (numbers, booleans, arrays, quoted strings); anything that does not
/// parse, like a bare `iid`, is taken as a string.
fn parse_override(pair: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = pair
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{pair}' is not KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override '{pair}' has an empty key")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v was just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

impl ExperimentConfig {
    /// Builds a config from an optional TOML file plus `KEY=VALUE` overrides,
    /// then validates it. Without a file, overrides apply to the defaults; a
    /// file must state at least `hv_dim`.
    pub fn load(toml_text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = match toml_text {
            Some(text) => text.parse().map_err(config_err)?,
            None => toml::Table::try_from(Self::default()).map_err(config_err)?,
        };
        for pair in overrides {
            let (key, value) = parse_override(pair)?;
            table.insert(key, value);
        }
        let cfg: Self = toml::Value::Table(table).try_into().map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::load(Some(text), &[])
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("hv_dim", self.hv_dim),
            ("num_clients", self.num_clients),
            ("per_class_per_client", self.per_class_per_client),
            ("main_samples", self.main_samples),
            ("num_users", self.num_users),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{key} must be positive")));
            }
        }
        if self.partition == PartitionMode::NoniidShards && self.shards_per_client == 0 {
            return Err(Error::Config(
                "shards_per_client must be positive in noniid_shards mode".into(),
            ));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        if !(self.weight_w >= 0.0) || !self.weight_w.is_finite() {
            return Err(Error::Config(format!(
                "weight_w must be non-negative and finite, got {}",
                self.weight_w
            )));
        }
        for (key, v) in [
            ("total_bandwidth_hz", self.total_bandwidth_hz),
            ("max_power_w", self.max_power_w),
            ("energy_budget_j", self.energy_budget_j),
            ("payload_bits", self.payload_bits),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("area_side_m", self.area_side_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{key} must be positive and finite, got {v}"
                )));
            }
        }
        if let Some(&d) = self.distances_m.iter().find(|&&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::Config(format!(
                "distances_m entries must be positive and finite, got {d}"
            )));
        }
        if self.task == Task::NetSweep {
            if self.sweep_bandwidths_hz.is_empty() {
                return Err(Error::Config("sweep_bandwidths_hz must not be empty".into()));
            }
            if let Some(&b) = self
                .sweep_bandwidths_hz
                .iter()
                .find(|&&b| !(b > 0.0) || !b.is_finite())
            {
                return Err(Error::Config(format!(
                    "sweep_bandwidths_hz entries must be positive and finite, got {b}"
                )));
            }
        }
        Ok(())
    }

    /// Images of every digit in the client pool as a whole.
    pub fn pool_per_class(&self) -> usize {
        self.num_clients * self.per_class_per_client
    }

    /// The split of the client pool this config asks for.
    pub fn partition_spec(&self) -> PartitionSpec {
        match self.partition {
            PartitionMode::Iid => PartitionSpec::iid(
                self.num_clients,
                self.per_class_per_client,
                self.master_seed,
            ),
            PartitionMode::NoniidShards => PartitionSpec::noniid_shards(
                self.num_clients,
                self.shards_per_client,
                self.master_seed,
            ),
        }
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            carrier_freq_hz: self.carrier_freq_hz,
            area_side_m: self.area_side_m,
            ..ChannelParams::default()
        }
    }

    /// The uplink scenario at the given total bandwidth, with user positions
    /// taken from `distances_m` or else drawn from `master_seed`.
    pub fn scenario_at(&self, total_bandwidth_hz: f64) -> Result<NetworkScenario> {
        if self.distances_m.is_empty() {
            NetworkScenario::random(
                self.num_users,
                self.master_seed,
                total_bandwidth_hz,
                self.max_power_w,
                self.energy_budget_j,
                self.payload_bits,
                self.channel(),
            )
        } else {
            NetworkScenario::new(
                self.distances_m.clone(),
                total_bandwidth_hz,
                self.max_power_w,
                self.energy_budget_j,
                self.payload_bits,
                self.channel(),
            )
        }
    }

    pub fn scenario(&self) -> Result<NetworkScenario> {
        self.scenario_at(self.total_bandwidth_hz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_all_defaults() {
        let cfg = ExperimentConfig::from_toml("hv_dim = 10000").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.task, Task::FslHdc);
        assert_eq!(cfg.fed_epochs, 15);
        assert_eq!(cfg.pool_per_class(), 600);
    }

    #[test]
    fn missing_hv_dim_is_named() {
        let err = ExperimentConfig::from_toml("num_clients = 10").unwrap_err();
        assert!(err.to_string().contains("hv_dim"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("hv_dim = 100\nhv_dimm = 2").unwrap_err();
        assert!(err.to_string().contains("hv_dimm"), "{err}");
    }

    #[test]
    fn overrides_beat_file_values_and_defaults() {
        let cfg = ExperimentConfig::load(
            Some("hv_dim = 100\nalpha = 2.0"),
            &[
                "alpha=3.5".into(),
                "partition=noniid_shards".into(),
                "task=net_opt".into(),
                "bipolarize_samples=false".into(),
                "sweep_bandwidths_hz=[1e6, 2e6]".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.alpha, 3.5);
        assert_eq!(cfg.partition, PartitionMode::NoniidShards);
        assert_eq!(cfg.task, Task::NetOpt);
        assert!(!cfg.bipolarize_samples);
        assert_eq!(cfg.sweep_bandwidths_hz, vec![1e6, 2e6]);
        assert_eq!(cfg.hv_dim, 100);
    }

    #[test]
    fn overrides_alone_work_without_a_file() {
        let cfg = ExperimentConfig::load(None, &["hv_dim=500".into()]).unwrap();
        assert_eq!(cfg.hv_dim, 500);
        assert_eq!(cfg.num_clients, 10);
    }

    #[test]
    fn bad_override_shapes_are_config_errors() {
        assert!(ExperimentConfig::load(None, &["alpha".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["=3".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["alpha=oops".into()]).is_err());
    }

    #[test]
    fn validation_names_the_offending_key() {
        let err = ExperimentConfig::from_toml("hv_dim = 100\nalpha = 0.0").unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
        let err = ExperimentConfig::from_toml("hv_dim = 100\nmax_power_w = -1.0").unwrap_err();
        assert!(err.to_string().contains("max_power_w"), "{err}");
        let err =
            ExperimentConfig::from_toml("hv_dim = 100\ntask = \"net_sweep\"\nsweep_bandwidths_hz = []")
                .unwrap_err();
        assert!(err.to_string().contains("sweep_bandwidths_hz"), "{err}");
    }

    #[test]
    fn partition_spec_carries_the_seed() {
        let cfg = ExperimentConfig::load(
            None,
            &["master_seed=7".into(), "partition=noniid_shards".into()],
        )
        .unwrap();
        let spec = cfg.partition_spec();
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.num_shards, 20);
    }

    #[test]
    fn explicit_distances_override_random_placement() {
        let cfg =
            ExperimentConfig::load(None, &["distances_m=[10.0, 20.0]".into()]).unwrap();
        let s = cfg.scenario().unwrap();
        assert_eq!(s.distances_m, vec![10.0, 20.0]);
        assert_eq!(s.num_users(), 2);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
