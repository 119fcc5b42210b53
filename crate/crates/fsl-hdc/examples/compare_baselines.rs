//! Head-to-head of the split pipeline against the centralized-federation
//! baseline on identical uploads, seeds, and partitions. The baseline trains
//! the two-class model directly on pooled uploads, which is more accurate but
//! requires shipping every sample to one place; the split pipeline keeps
//! digit training at the fed server and pays a small accuracy gap for it.
//!
//! Run with `cargo run --release --example compare_baselines`.

use std::path::PathBuf;

use fsl_hdc::data::{load_idx, subsample};
use fsl_hdc::runner::{encode_world, run_fl, run_fsl};
use fsl_hdc::{ExperimentConfig, Result};

fn mnist(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist").join(name)
}

fn main() -> Result<()> {
    let cfg = ExperimentConfig {
        hv_dim: 4000,
        num_clients: 5,
        per_class_per_client: 20,
        main_samples: 500,
        fed_epochs: 8,
        main_epochs: 20,
        master_seed: 7,
        ..ExperimentConfig::default()
    };
    cfg.validate()?;

    let train = load_idx(
        &mnist("train-images-idx3-ubyte.gz"),
        &mnist("train-labels-idx1-ubyte.gz"),
    )?;
    let test_full = load_idx(
        &mnist("t10k-images-idx3-ubyte.gz"),
        &mnist("t10k-labels-idx1-ubyte.gz"),
    )?;
    let test = subsample(&test_full, 100, cfg.master_seed)?;

    // One encoded world feeds both methods, so the comparison is matched
    // sample for sample.
    let world = encode_world(&cfg, &train, &test)?;
    let fsl = run_fsl(&cfg, &world)?;
    let fl = run_fl(&cfg, world.uploads.clone(), &world.encoded_test)?;

    println!("test accuracy after each upload-side epoch:");
    println!("  epoch   split    pooled");
    for (epoch, (s, p)) in fsl.fed_epoch_accuracy.iter().zip(&fl.epoch_accuracy).enumerate() {
        println!("  {:5}   {s:.4}   {p:.4}", epoch + 1);
    }

    println!("\nfinal:  split {:.4}, pooled {:.4}", fsl.test_accuracy, fl.test_accuracy);
    println!("pooled-over-split gap: {:+.4}", fl.test_accuracy - fsl.test_accuracy);
    Ok(())
}
