//! Checks the IDX loader against the real MNIST files shipped in data/mnist.

use std::path::PathBuf;

use fsl_hdc::data::{load_idx, Dataset, IMAGE_PIXELS, NUM_DIGITS};

fn mnist(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist").join(name)
}

fn load_train() -> Dataset {
    load_idx(
        &mnist("train-images-idx3-ubyte.gz"),
        &mnist("train-labels-idx1-ubyte.gz"),
    )
    .expect("train set loads")
}

fn load_test() -> Dataset {
    load_idx(
        &mnist("t10k-images-idx3-ubyte.gz"),
        &mnist("t10k-labels-idx1-ubyte.gz"),
    )
    .expect("test set loads")
}

#[test]
fn shapes_match_the_published_sets() {
    let train = load_train();
    let test = load_test();
    assert_eq!(train.len(), 60_000);
    assert_eq!(test.len(), 10_000);
    assert_eq!(train.row_len(), IMAGE_PIXELS);
    assert_eq!(test.row_len(), IMAGE_PIXELS);
}

#[test]
fn known_test_labels_come_out_in_file_order() {
    let test = load_test();
    let first_ten: Vec<u8> = (0..10).map(|i| test.label(i)).collect();
    assert_eq!(first_ten, [7, 2, 1, 0, 4, 1, 4, 9, 5, 9]);
}

#[test]
fn every_digit_is_well_represented() {
    for (ds, floor) in [(load_train(), 5_000), (load_test(), 800)] {
        let mut counts = [0usize; NUM_DIGITS];
        for &l in ds.labels() {
            counts[l as usize] += 1;
        }
        for (digit, &n) in counts.iter().enumerate() {
            assert!(n >= floor, "digit {digit} has only {n} samples");
        }
        assert_eq!(counts.iter().sum::<usize>(), ds.len());
    }
}

#[test]
fn images_look_like_white_ink_on_black() {
    for ds in [load_train(), load_test()] {
        let mut total = 0u64;
        for i in 0..ds.len() {
            let img = ds.image(i);
            let ink = img.iter().filter(|&&p| p > 0).count();
            // Strokes cover a minority of the frame; an inverted or
            // misframed load floods it.
            assert!(ink > 0, "image {i} is blank");
            assert!(ink * 2 < img.len(), "image {i} is mostly ink");
            total += img.iter().map(|&p| p as u64).sum::<u64>();
        }
        // Mean intensity of both published sets is close to 33/255.
        let mean = total as f64 / (ds.len() * ds.row_len()) as f64;
        assert!((30.0..=36.0).contains(&mean), "mean intensity {mean:.2}");
    }
}
