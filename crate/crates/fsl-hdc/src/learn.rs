//! Associative-memory training, inference, and retraining.
//!
//! A model is one class hypervector per label. One-pass training sums each
//! label's sample hypervectors; inference returns the label whose class
//! vector has the highest cosine similarity to the query; retraining walks
//! the samples once and, on every mispredict, subtracts the sample from the
//! predicted class and adds it to the true class.
//!
//! Class vectors are stored as f64 so non-integer learning rates and
//! composition weights work without a second storage type. All values that
//! arise from integer inputs stay integral (far below 2^53), so integer-rate
//! updates remain exact and order-independent sums are bit-reproducible.

use crate::error::{Error, Result};
use crate::hdc::Hypervector;

/// A sample hypervector with its class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledHv {
    pub hv: Hypervector,
    pub label: u8,
}

/// Label -> class hypervector, ordered by label.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociativeMemory {
    dim: usize,
    labels: Vec<u8>,
    class_hvs: Vec<Vec<f64>>,
}

impl AssociativeMemory {
    /// Builds a model from explicit class vectors. Labels must be unique and
    /// dimensions uniform; classes are reordered by ascending label.
    pub fn from_class_hvs(classes: Vec<(u8, Vec<f64>)>) -> Result<Self> {
        let mut classes = classes;
        classes.sort_by_key(|(label, _)| *label);
        let dim = classes
            .first()
            .map(|(_, hv)| hv.len())
            .ok_or_else(|| Error::InvalidArgument("associative memory needs a class".into()))?;
        let mut labels = Vec::with_capacity(classes.len());
        let mut class_hvs = Vec::with_capacity(classes.len());
        for (label, hv) in classes {
            if labels.last() == Some(&label) {
                return Err(Error::InvalidArgument(format!("duplicate label {label}")));
            }
            if hv.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "class {label} has dimension {}, expected {dim}",
                    hv.len()
                )));
            }
            labels.push(label);
            class_hvs.push(hv);
        }
        Ok(Self {
            dim,
            labels,
            class_hvs,
        })
    }

    /// One-pass training: each class vector is the element-wise sum of that
    /// label's sample hypervectors. Order of samples does not matter.
    pub fn train_one_pass(samples: &[LabeledHv]) -> Result<Self> {
        let dim = samples
            .first()
            .map(|s| s.hv.len())
            .ok_or_else(|| Error::InvalidArgument("training set is empty".into()))?;
        let mut labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
        labels.sort_unstable();
        labels.dedup();
        let mut class_hvs = vec![vec![0.0; dim]; labels.len()];
        for s in samples {
            if s.hv.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "sample has dimension {}, expected {dim}",
                    s.hv.len()
                )));
            }
            let c = labels.binary_search(&s.label).expect("label collected above");
            for (a, &x) in class_hvs[c].iter_mut().zip(&s.hv) {
                *a += f64::from(x);
            }
        }
        Ok(Self {
            dim,
            labels,
            class_hvs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_hv(&self, label: u8) -> Option<&[f64]> {
        let c = self.labels.binary_search(&label).ok()?;
        Some(&self.class_hvs[c])
    }

    pub fn classes(&self) -> impl Iterator<Item = (u8, &[f64])> {
        self.labels
            .iter()
            .copied()
            .zip(self.class_hvs.iter().map(Vec::as_slice))
    }

    /// Sign of every class vector element, with zero mapped to +1.
    pub fn bipolarized(&self) -> Self {
        Self {
            dim: self.dim,
            labels: self.labels.clone(),
            class_hvs: self
                .class_hvs
                .iter()
                .map(|hv| hv.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect())
                .collect(),
        }
    }

    /// Index of the most similar class; ties keep the smallest label.
    fn argmax_index(&self, query: &[i32]) -> Result<usize> {
        if query.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "query has dimension {}, expected {}",
                query.len(),
                self.dim
            )));
        }
        let qnorm: f64 = query.iter().map(|&x| f64::from(x) * f64::from(x)).sum();
        if qnorm == 0.0 {
            return Err(Error::DegenerateInput("query has zero norm".into()));
        }
        let mut best = None;
        for (c, hv) in self.class_hvs.iter().enumerate() {
            let mut dot = 0.0;
            let mut norm = 0.0;
            for (&x, &q) in hv.iter().zip(query) {
                dot += x * f64::from(q);
                norm += x * x;
            }
            if norm == 0.0 {
                return Err(Error::DegenerateInput(format!(
                    "class {} has a zero-norm hypervector",
                    self.labels[c]
                )));
            }
            // The query norm is a common positive factor; dot/sqrt(norm)
            // orders classes exactly like the cosine. Strict > keeps the
            // first (smallest) label on ties.
            let score = dot / norm.sqrt();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((c, score));
            }
        }
        Ok(best.expect("at least one class").0)
    }

    /// Label of the most similar class by cosine similarity.
    pub fn classify(&self, query: &[i32]) -> Result<u8> {
        Ok(self.labels[self.argmax_index(query)?])
    }

    /// One retraining pass in the given sample order. Each mispredicted
    /// sample immediately moves `alpha` times its hypervector from the
    /// predicted class to the true class, and later samples in the same pass
    /// see the updated model. Returns the number of mispredictions.
    pub fn retrain_epoch<'a, I>(&mut self, samples: I, alpha: f64) -> Result<usize>
    where
        I: IntoIterator<Item = &'a LabeledHv>,
    {
        if alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {alpha}"
            )));
        }
        let mut seen = 0usize;
        let mut misses = 0usize;
        for s in samples {
            seen += 1;
            let pred = self.argmax_index(&s.hv)?;
            if self.labels[pred] == s.label {
                continue;
            }
            let real = self.labels.binary_search(&s.label).map_err(|_| {
                Error::InvalidArgument(format!("sample label {} not in the model", s.label))
            })?;
            misses += 1;
            for (a, &x) in self.class_hvs[pred].iter_mut().zip(&s.hv) {
                *a -= alpha * f64::from(x);
            }
            for (a, &x) in self.class_hvs[real].iter_mut().zip(&s.hv) {
                *a += alpha * f64::from(x);
            }
        }
        if seen == 0 {
            return Err(Error::InvalidArgument("retraining set is empty".into()));
        }
        Ok(misses)
    }

    /// Fraction of samples whose predicted label matches the true label.
    pub fn evaluate<'a, I>(&self, test: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a LabeledHv>,
    {
        let mut seen = 0usize;
        let mut correct = 0usize;
        for s in test {
            seen += 1;
            if self.classify(&s.hv)? == s.label {
                correct += 1;
            }
        }
        if seen == 0 {
            return Err(Error::InvalidArgument("evaluation set is empty".into()));
        }
        Ok(correct as f64 / seen as f64)
    }
}
