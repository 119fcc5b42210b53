//! The federated split training protocol.
//!
//! Roles: clients encode their local images into sample hypervectors and
//! upload them; the fed server pools the uploads, trains and retrains a
//! ten-digit model, bipolarizes its class vectors, and forwards that
//! "smashed" model; the main server composes a two-class even/odd model from
//! the smashed digit classes plus its own locally encoded samples, retrains
//! it with early stopping, and broadcasts the result.
//!
//! A pooled baseline is also provided: the fed server trains the two-class
//! model directly on the parity-relabeled uploads, with no main-server stage.

use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::data::{Dataset, NUM_DIGITS};
use crate::error::{Error, Result};
use crate::hdc::{bipolarize, ItemMemory};
use crate::learn::{AssociativeMemory, LabeledHv};
use crate::rng::{stream_rng, Stream};

/// Fraction of main-server samples held out to detect retraining plateaus.
const HOLDOUT_FRAC: f64 = 0.1;
/// Consecutive non-improving epochs tolerated before early stop.
const PATIENCE: usize = 3;

/// Digit -> output-class mapping for the two-way task: even digits to class
/// 0, odd digits to class 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParityMap;

impl ParityMap {
    pub fn class_of(self, digit: u8) -> u8 {
        digit & 1
    }

    pub fn digits_in(self, class: u8) -> impl Iterator<Item = u8> {
        (0..NUM_DIGITS as u8).filter(move |d| d & 1 == class)
    }
}

/// One simulated client: its slice of the training pool and the vector banks
/// every party regenerates from the broadcast seed.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub client_id: usize,
    pub data: Dataset,
    pub item_memory: Arc<ItemMemory>,
}

impl ClientState {
    /// Encodes the client's images, keeping digit labels. With
    /// `bipolarize_samples` the integer encodings are sign-thresholded before
    /// upload, which is the default wire format.
    pub fn encode(&self, bipolarize_samples: bool) -> Result<Vec<LabeledHv>> {
        encode_dataset(&self.data, &self.item_memory, bipolarize_samples)
    }
}

/// Encodes every image of a dataset, preserving its labels.
pub fn encode_dataset(
    ds: &Dataset,
    im: &ItemMemory,
    bipolarize_samples: bool,
) -> Result<Vec<LabeledHv>> {
    ds.iter()
        .map(|(pixels, label)| {
            let hv = im.encode_sample(pixels)?;
            let hv = if bipolarize_samples { bipolarize(&hv) } else { hv };
            Ok(LabeledHv { hv, label })
        })
        .collect()
}

/// The fed server's digit model after bipolarization; what goes over the
/// fed-to-main link instead of raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct SmashedAm(AssociativeMemory);

impl SmashedAm {
    pub fn new(am: AssociativeMemory) -> Result<Self> {
        for (label, hv) in am.classes() {
            if hv.iter().any(|&x| x != 1.0 && x != -1.0) {
                return Err(Error::InvalidArgument(format!(
                    "smashed class {label} is not bipolar"
                )));
            }
        }
        Ok(Self(am))
    }

    pub fn am(&self) -> &AssociativeMemory {
        &self.0
    }
}

/// The broadcast two-class model.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalAm(AssociativeMemory);

impl GlobalAm {
    pub fn new(am: AssociativeMemory) -> Result<Self> {
        if am.labels() != [0, 1] {
            return Err(Error::InvalidArgument(format!(
                "global model must have classes 0 and 1, got {:?}",
                am.labels()
            )));
        }
        Ok(Self(am))
    }

    pub fn am(&self) -> &AssociativeMemory {
        &self.0
    }
}

/// Everything the fed-server stage produces.
#[derive(Debug, Clone, PartialEq)]
pub struct FedOutcome {
    /// One-pass sums over the pooled uploads, before any retraining. This
    /// depends only on the multiset of uploads, not on how clients split them.
    pub pooled_am: AssociativeMemory,
    /// Final model after retraining and bipolarization.
    pub smashed: SmashedAm,
    /// Bipolarized snapshot after each retraining epoch.
    pub epoch_smashed: Vec<SmashedAm>,
    /// Mispredictions per retraining epoch.
    pub epoch_errors: Vec<usize>,
}

/// Pools every client's uploads, trains the digit model in one pass, retrains
/// it for `epochs` passes in a seeded fixed order, and bipolarizes the class
/// vectors.
pub fn fed_server_train(
    uploads: &[LabeledHv],
    epochs: usize,
    alpha: f64,
    seed: u64,
) -> Result<FedOutcome> {
    let pooled_am = AssociativeMemory::train_one_pass(uploads)?;
    let mut order: Vec<usize> = (0..uploads.len()).collect();
    order.shuffle(&mut stream_rng(seed, Stream::FedShuffle, &[]));
    let mut am = pooled_am.clone();
    let mut epoch_errors = Vec::with_capacity(epochs);
    let mut epoch_smashed = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let errors = am.retrain_epoch(order.iter().map(|&i| &uploads[i]), alpha)?;
        epoch_errors.push(errors);
        epoch_smashed.push(SmashedAm(am.bipolarized()));
    }
    Ok(FedOutcome {
        pooled_am,
        smashed: SmashedAm(am.bipolarized()),
        epoch_smashed,
        epoch_errors,
    })
}

/// Everything the main-server stage produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MainOutcome {
    pub global: GlobalAm,
    /// Mispredictions per retraining epoch over the 90% training split.
    pub epoch_errors: Vec<usize>,
    /// Accuracy on the 10% holdout after each epoch; None when the holdout
    /// rounds to zero samples.
    pub holdout_accuracy: Vec<Option<f64>>,
}

/// Composes and retrains the two-class model from pre-encoded, digit-labeled
/// local samples.
///
/// Composition: each class vector is `weight_w` times the sum of the smashed
/// digit vectors of that parity, plus the sum of the local sample vectors of
/// that parity. Retraining then runs over a seeded 90% split of the local
/// samples (order fixed across epochs) and stops early on a zero-error epoch
/// or when holdout accuracy stops improving.
pub fn main_server_train_encoded(
    smashed: &SmashedAm,
    local: &[LabeledHv],
    map: ParityMap,
    epochs_cap: usize,
    alpha: f64,
    weight_w: f64,
    seed: u64,
) -> Result<MainOutcome> {
    if local.is_empty() {
        return Err(Error::InvalidArgument(
            "main server has no local samples".into(),
        ));
    }
    let dim = smashed.am().dim();
    let mut classes = Vec::with_capacity(2);
    for class in 0..=1u8 {
        let mut acc = vec![0.0f64; dim];
        for digit in map.digits_in(class) {
            if let Some(hv) = smashed.am().class_hv(digit) {
                for (a, &x) in acc.iter_mut().zip(hv) {
                    *a += weight_w * x;
                }
            }
        }
        for s in local.iter().filter(|s| map.class_of(s.label) == class) {
            if s.hv.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "local sample has dimension {}, expected {dim}",
                    s.hv.len()
                )));
            }
            for (a, &x) in acc.iter_mut().zip(&s.hv) {
                *a += f64::from(x);
            }
        }
        classes.push((class, acc));
    }
    let mut am = AssociativeMemory::from_class_hvs(classes)?;

    let mut order: Vec<usize> = (0..local.len()).collect();
    order.shuffle(&mut stream_rng(seed, Stream::MainShuffle, &[]));
    let holdout_len = (local.len() as f64 * HOLDOUT_FRAC).round() as usize;
    let relabel = |i: usize| LabeledHv {
        hv: local[i].hv.clone(),
        label: map.class_of(local[i].label),
    };
    let holdout: Vec<LabeledHv> = order[..holdout_len].iter().map(|&i| relabel(i)).collect();
    let train: Vec<LabeledHv> = order[holdout_len..].iter().map(|&i| relabel(i)).collect();

    let mut epoch_errors = Vec::new();
    let mut holdout_accuracy = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut stale = 0usize;
    for _ in 0..epochs_cap {
        let errors = am.retrain_epoch(&train, alpha)?;
        epoch_errors.push(errors);
        let acc = if holdout.is_empty() {
            None
        } else {
            Some(am.evaluate(&holdout)?)
        };
        holdout_accuracy.push(acc);
        if errors == 0 {
            break;
        }
        if let Some(acc) = acc {
            if acc > best {
                best = acc;
                stale = 0;
            } else {
                stale += 1;
                if stale >= PATIENCE {
                    break;
                }
            }
        }
    }
    Ok(MainOutcome {
        global: GlobalAm::new(am)?,
        epoch_errors,
        holdout_accuracy,
    })
}

/// [`main_server_train_encoded`] on raw images: encodes the main server's
/// local dataset with the shared banks first.
#[allow(clippy::too_many_arguments)]
pub fn main_server_train(
    smashed: &SmashedAm,
    local: &Dataset,
    im: &ItemMemory,
    map: ParityMap,
    epochs_cap: usize,
    alpha: f64,
    weight_w: f64,
    bipolarize_samples: bool,
    seed: u64,
) -> Result<MainOutcome> {
    let encoded = encode_dataset(local, im, bipolarize_samples)?;
    main_server_train_encoded(smashed, &encoded, map, epochs_cap, alpha, weight_w, seed)
}

/// Accuracy of a model on digit-labeled encoded samples, scored against the
/// parity of each label.
pub fn parity_accuracy(
    am: &AssociativeMemory,
    test: &[LabeledHv],
    map: ParityMap,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("evaluation set is empty".into()));
    }
    let mut correct = 0usize;
    for s in test {
        if am.classify(&s.hv)? == map.class_of(s.label) {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// What every client does after download: encode the test images with the
/// shared banks and score the broadcast model on the even/odd task.
pub fn broadcast_and_evaluate(
    global: &GlobalAm,
    test: &Dataset,
    im: &ItemMemory,
    map: ParityMap,
    bipolarize_samples: bool,
) -> Result<f64> {
    let encoded = encode_dataset(test, im, bipolarize_samples)?;
    parity_accuracy(global.am(), &encoded, map)
}

/// What the pooled baseline produces.
#[derive(Debug, Clone, PartialEq)]
pub struct FlOutcome {
    pub model: AssociativeMemory,
    /// Mispredictions per retraining epoch.
    pub epoch_errors: Vec<usize>,
    /// Model snapshot after each retraining epoch, for convergence curves.
    pub epoch_models: Vec<AssociativeMemory>,
}

/// Baseline without the split: the fed server relabels the pooled uploads by
/// parity and trains/retrains the two-class model directly. Consumes the
/// uploads since only the labels change.
pub fn fl_hdc_baseline(
    mut uploads: Vec<LabeledHv>,
    map: ParityMap,
    epochs: usize,
    alpha: f64,
    seed: u64,
) -> Result<FlOutcome> {
    for s in &mut uploads {
        s.label = map.class_of(s.label);
    }
    let mut model = AssociativeMemory::train_one_pass(&uploads)?;
    let mut order: Vec<usize> = (0..uploads.len()).collect();
    order.shuffle(&mut stream_rng(seed, Stream::FedShuffle, &[]));
    let mut epoch_errors = Vec::with_capacity(epochs);
    let mut epoch_models = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let errors = model.retrain_epoch(order.iter().map(|&i| &uploads[i]), alpha)?;
        epoch_errors.push(errors);
        epoch_models.push(model.clone());
    }
    Ok(FlOutcome {
        model,
        epoch_errors,
        epoch_models,
    })
}
