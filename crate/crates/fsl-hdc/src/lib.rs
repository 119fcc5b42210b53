//! Federated split learning with hyperdimensional computing, plus the
//! uplink power/bandwidth optimizer that serves it.
//!
//! The crate has two halves that meet in [`runner`]:
//!
//! * **Learning.** [`hdc`] maps 28x28 grayscale digits to high-dimensional
//!   bipolar vectors; [`learn`] holds the class-vector memory with one-pass
//!   training and error-driven retraining; [`protocol`] wires clients, a
//!   federation server, and a main server into the split training flow and
//!   its pooled-upload baseline; [`data`] reads IDX image/label files and
//!   partitions them across clients.
//! * **Networking.** [`net`] models the mmWave uplink (blockage-blended path
//!   loss, Shannon rates) and jointly picks transmission powers and a
//!   bandwidth split so the slowest client upload finishes as early as
//!   possible.
//!
//! Everything randomized draws from [`rng::stream_rng`], which derives an
//! independent stream per (seed, purpose, index), so results depend only on
//! the master seed and not on evaluation order. Start with the `examples/`
//! directory; each file there exercises one capability end to end.

// Validation sites write `!(v > 0.0)` so NaN fails closed; the suggested
// `v <= 0.0` form would accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod hdc;
pub mod learn;
pub mod net;
pub mod protocol;
pub mod rng;
pub mod runner;
pub mod solve;

pub use config::{ExperimentConfig, Task};
pub use data::{Dataset, PartitionMode, PartitionSpec};
pub use error::{Error, Result};
pub use hdc::{Hypervector, ItemMemory, ValueEncoding};
pub use learn::{AssociativeMemory, LabeledHv};
pub use net::{AllocationResult, ChannelParams, NetworkScenario};
pub use protocol::ParityMap;
pub use runner::{compare_methods, run_experiment, RunArtifacts};
