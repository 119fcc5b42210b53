//! Encodes a slice of MNIST into hypervectors and trains a ten-class digit
//! classifier in one pass, then sharpens it with a few retraining epochs.
//! Small sample counts keep this quick; the full pipeline lives in the
//! `fsl_pipeline` example.
//!
//! Run with `cargo run --release --example encode_digits`.

use std::path::PathBuf;
use std::sync::Arc;

use fsl_hdc::data::{load_idx, subsample, PIXEL_LEVELS};
use fsl_hdc::hdc::{ItemMemory, ValueEncoding};
use fsl_hdc::learn::AssociativeMemory;
use fsl_hdc::protocol::encode_dataset;
use fsl_hdc::Result;

const HV_DIM: usize = 10_000;
const TRAIN_PER_CLASS: usize = 50;
const TEST_PER_CLASS: usize = 50;
const EPOCHS: usize = 5;
const SEED: u64 = 7;

fn mnist(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist").join(name)
}

fn main() -> Result<()> {
    let train_full = load_idx(
        &mnist("train-images-idx3-ubyte.gz"),
        &mnist("train-labels-idx1-ubyte.gz"),
    )?;
    let test_full = load_idx(
        &mnist("t10k-images-idx3-ubyte.gz"),
        &mnist("t10k-labels-idx1-ubyte.gz"),
    )?;
    let train = subsample(&train_full, TRAIN_PER_CLASS, SEED)?;
    let test = subsample(&test_full, TEST_PER_CLASS, SEED + 1)?;
    println!("encoding {} train + {} test images at D = {HV_DIM}", train.len(), test.len());

    let im = Arc::new(ItemMemory::generate(
        HV_DIM,
        train.row_len(),
        PIXEL_LEVELS,
        SEED,
        ValueEncoding::Level,
    )?);
    let encoded_train = encode_dataset(&train, &im, true)?;
    let encoded_test = encode_dataset(&test, &im, true)?;

    // One pass: each class vector is just the sum of its training samples.
    let mut am = AssociativeMemory::train_one_pass(&encoded_train)?;
    println!(
        "one-pass digit accuracy: {:.4} (test), {:.4} (train)",
        am.evaluate(&encoded_test)?,
        am.evaluate(&encoded_train)?
    );

    // Retraining moves each misclassified sample out of the wrong class
    // vector and into the right one; a handful of epochs is enough here.
    for epoch in 1..=EPOCHS {
        let errors = am.retrain_epoch(&encoded_train, 1.0)?;
        println!(
            "epoch {epoch}: {errors:3} train errors, test accuracy {:.4}",
            am.evaluate(&encoded_test)?
        );
    }

    // The class vectors themselves are interpretable: the model's guess is
    // the class vector with the highest cosine to the query.
    let sample = &encoded_test[0];
    println!(
        "first test sample: label {}, classified {}",
        sample.label,
        am.classify(&sample.hv)?
    );
    Ok(())
}
