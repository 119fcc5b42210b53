//! The federated split pipeline end to end at reduced scale: clients encode
//! and upload, the fed server trains and retrains a ten-class digit model,
//! the main server composes and retrains the two-class parity model, and the
//! result is broadcast and scored. Scale is cut (fewer samples, D = 4000) so
//! this finishes in seconds; the defaults in [`fsl_hdc::ExperimentConfig`]
//! reproduce the full experiment.
//!
//! Run with `cargo run --release --example fsl_pipeline`.

use std::path::PathBuf;

use fsl_hdc::data::{load_idx, subsample};
use fsl_hdc::runner::{encode_world, run_fsl};
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
    // A balanced slice of the test set keeps evaluation cheap.
    let test = subsample(&test_full, 100, cfg.master_seed)?;

    println!(
        "{} clients x {} samples, {} main-server samples, {} test images, D = {}",
        cfg.num_clients,
        cfg.per_class_per_client * 10,
        cfg.main_samples,
        test.len(),
        cfg.hv_dim
    );

    // Clients share nothing but the item-memory seed; each encodes its own
    // partition and uploads sign-thresholded hypervectors.
    let world = encode_world(&cfg, &train, &test)?;
    for client in &world.clients {
        println!("  client {}: {} samples", client.client_id, client.data.len());
    }

    let run = run_fsl(&cfg, &world)?;

    // The fed server's convergence curve: training errors on the pooled
    // uploads, plus the test accuracy the full pipeline would reach if it
    // stopped after that epoch.
    println!("\nfed server (10-class digit model):");
    for (epoch, (errors, acc)) in run
        .fed
        .epoch_errors
        .iter()
        .zip(&run.fed_epoch_accuracy)
        .enumerate()
    {
        println!("  epoch {:2}: {errors:4} train errors, pipeline accuracy {acc:.4}", epoch + 1);
    }

    // The main server retrains the composed parity model on its own encoded
    // split, watching a held-out 10% for early stopping.
    println!("\nmain server (2-class parity model):");
    for (epoch, (errors, holdout)) in run
        .main
        .epoch_errors
        .iter()
        .zip(&run.main.holdout_accuracy)
        .enumerate()
    {
        match holdout {
            Some(h) => println!("  epoch {:2}: {errors:4} train errors, holdout {h:.4}", epoch + 1),
            None => println!("  epoch {:2}: {errors:4} train errors", epoch + 1),
        }
    }

    println!("\nbroadcast parity accuracy on the test slice: {:.4}", run.test_accuracy);
    Ok(())
}
