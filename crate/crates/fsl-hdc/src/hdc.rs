//! Hypervector primitives and the shared item memory.
//!
//! Everything above this layer is built from five operations on integer
//! vectors: element-wise product (bind), element-wise sum (bundle), circular
//! shift (permute), sign thresholding (bipolarize), and cosine similarity.
//! A record-based encoder maps an image to a single hypervector by binding
//! each pixel-position vector with the vector for that pixel's intensity and
//! bundling the results.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Fixed-dimension integer vector. Bipolar (every element ±1) after
/// [`bipolarize`]; integer-valued after [`bundle`] or [`ItemMemory::encode_sample`].
pub type Hypervector = Vec<i32>;

/// True when every element is +1 or -1.
pub fn is_bipolar(h: &[i32]) -> bool {
    h.iter().all(|&x| x == 1 || x == -1)
}

/// Draws a bipolar hypervector with i.i.d. equiprobable ±1 elements.
pub fn random_bipolar<R: Rng>(dim: usize, rng: &mut R) -> Result<Hypervector> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be at least 1".into()));
    }
    Ok((0..dim)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect())
}

/// Element-wise product. Self-inverse on bipolar inputs.
pub fn bind(a: &[i32], b: &[i32]) -> Result<Hypervector> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "bind dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x * y).collect())
}

/// Element-wise sum of one or more hypervectors. The result is generally
/// not bipolar.
pub fn bundle(hvs: &[Hypervector]) -> Result<Hypervector> {
    let first = hvs
        .first()
        .ok_or_else(|| Error::InvalidArgument("bundle of empty list".into()))?;
    let mut acc = first.clone();
    for h in &hvs[1..] {
        if h.len() != acc.len() {
            return Err(Error::InvalidArgument(format!(
                "bundle dimension mismatch: {} vs {}",
                acc.len(),
                h.len()
            )));
        }
        for (a, &x) in acc.iter_mut().zip(h) {
            *a += x;
        }
    }
    Ok(acc)
}

/// Circular right shift by `k` positions (negative `k` shifts left).
pub fn permute(h: &[i32], k: i64) -> Hypervector {
    let mut out = h.to_vec();
    if !h.is_empty() {
        let shift = k.rem_euclid(h.len() as i64) as usize;
        out.rotate_right(shift);
    }
    out
}

/// Element-wise sign with zero mapped to +1, so the output is always bipolar.
pub fn bipolarize(h: &[i32]) -> Hypervector {
    h.iter().map(|&x| if x < 0 { -1 } else { 1 }).collect()
}

/// Cosine of the angle between two vectors, in [-1, 1].
pub fn cosine_similarity<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "cosine dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y): (f64, f64) = (x.into(), y.into());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateInput(
            "cosine similarity of a zero vector".into(),
        ));
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// How the value bank encodes intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueEncoding {
    /// Level vectors: entry 0 is random, entry v flips the first
    /// floor(v * (D/2) / (levels-1)) positions of a fixed random flip order,
    /// so nearby intensities stay similar.
    Level,
    /// Independent random bipolar vectors per intensity.
    Random,
}

/// The position and value vector banks shared by every party. Banks are a
/// pure function of `(seed, bank, index)`, so any party regenerating from the
/// broadcast seed gets bit-identical contents.
#[derive(Debug, Clone)]
pub struct ItemMemory {
    dim: usize,
    position_hvs: Vec<Hypervector>,
    value_hvs: Vec<Hypervector>,
    seed: u64,
    encoding: ValueEncoding,
}

impl ItemMemory {
    pub fn generate(
        dim: usize,
        num_positions: usize,
        num_values: usize,
        seed: u64,
        encoding: ValueEncoding,
    ) -> Result<Self> {
        if dim == 0 || num_positions == 0 || num_values == 0 {
            return Err(Error::InvalidArgument(
                "item memory dimensions must be at least 1".into(),
            ));
        }
        let position_hvs = (0..num_positions)
            .map(|k| random_bipolar(dim, &mut stream_rng(seed, Stream::PositionBank, &[k as u64])))
            .collect::<Result<Vec<_>>>()?;
        let value_hvs = match encoding {
            ValueEncoding::Random => (0..num_values)
                .map(|v| random_bipolar(dim, &mut stream_rng(seed, Stream::ValueBank, &[v as u64])))
                .collect::<Result<Vec<_>>>()?,
            ValueEncoding::Level => {
                let base = random_bipolar(dim, &mut stream_rng(seed, Stream::ValueBank, &[0]))?;
                let flip_order = flip_order(dim, seed);
                (0..num_values)
                    .map(|v| {
                        let mut hv = base.clone();
                        let flips = if num_values == 1 {
                            0
                        } else {
                            v * flip_order.len() / (num_values - 1)
                        };
                        for &i in &flip_order[..flips] {
                            hv[i] = -hv[i];
                        }
                        hv
                    })
                    .collect()
            }
        };
        Ok(Self {
            dim,
            position_hvs,
            value_hvs,
            seed,
            encoding,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn encoding(&self) -> ValueEncoding {
        self.encoding
    }

    pub fn position_hvs(&self) -> &[Hypervector] {
        &self.position_hvs
    }

    pub fn value_hvs(&self) -> &[Hypervector] {
        &self.value_hvs
    }

    /// Record-based encoding: the bundle over pixel positions k of
    /// bind(position_hvs[k], value_hvs[pixels[k]]). Output elements lie in
    /// [-P, P] for P pixels.
    pub fn encode_sample(&self, pixels: &[u8]) -> Result<Hypervector> {
        if pixels.len() != self.position_hvs.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} pixels, got {}",
                self.position_hvs.len(),
                pixels.len()
            )));
        }
        let mut acc = vec![0i32; self.dim];
        for (k, &px) in pixels.iter().enumerate() {
            let val = self.value_hvs.get(px as usize).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "pixel value {px} outside the {}-entry value bank",
                    self.value_hvs.len()
                ))
            })?;
            let pos = &self.position_hvs[k];
            for ((a, &p), &v) in acc.iter_mut().zip(pos).zip(val) {
                *a += p * v;
            }
        }
        Ok(acc)
    }
}

/// Random ordering of D/2 distinct positions used by the level value bank.
fn flip_order(dim: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut all: Vec<usize> = (0..dim).collect();
    all.shuffle(&mut stream_rng(seed, Stream::ValueFlipOrder, &[]));
    all.truncate(dim / 2);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    fn test_rng(ix: u64) -> rand_chacha::ChaCha8Rng {
        stream_rng(99, Stream::Diagnostics, &[ix])
    }

    #[test]
    fn random_bipolar_is_deterministic_and_bipolar() {
        let a = random_bipolar(64, &mut test_rng(0)).unwrap();
        let b = random_bipolar(64, &mut test_rng(0)).unwrap();
        assert_eq!(a, b);
        assert!(is_bipolar(&a));
        assert!(random_bipolar(0, &mut test_rng(0)).is_err());
    }

    #[test]
    fn random_pairs_are_nearly_orthogonal() {
        let a = random_bipolar(10_000, &mut test_rng(1)).unwrap();
        let b = random_bipolar(10_000, &mut test_rng(2)).unwrap();
        assert!(cosine_similarity(&a, &b).unwrap().abs() < 0.05);
    }

    #[test]
    fn bind_basics() {
        assert_eq!(bind(&[1, -1, 1], &[-1, -1, 1]).unwrap(), vec![-1, 1, 1]);
        let a = random_bipolar(256, &mut test_rng(3)).unwrap();
        let b = random_bipolar(256, &mut test_rng(4)).unwrap();
        assert_eq!(bind(&a, &a).unwrap(), vec![1; 256]);
        assert_eq!(bind(&a, &bind(&a, &b).unwrap()).unwrap(), b);
        assert!(bind(&[1], &[1, 1]).is_err());
    }

    #[test]
    fn bundle_basics() {
        let h = vec![1, -1, 1];
        assert_eq!(bundle(std::slice::from_ref(&h)).unwrap(), h);
        assert_eq!(
            bundle(&[vec![1, 1], vec![-1, 1], vec![1, 1]]).unwrap(),
            vec![1, 3]
        );
        assert!(bundle(&[]).is_err());
        assert!(bundle(&[vec![1], vec![1, 1]]).is_err());
    }

    #[test]
    fn bundle_of_two_random_vectors_stays_close_to_each() {
        let a = random_bipolar(10_000, &mut test_rng(5)).unwrap();
        let b = random_bipolar(10_000, &mut test_rng(6)).unwrap();
        let s = bundle(&[a.clone(), b]).unwrap();
        let c = cosine_similarity(&s, &a).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "{c}");
    }

    #[test]
    fn permute_basics() {
        assert_eq!(permute(&[1, 2, 3], 0), vec![1, 2, 3]);
        assert_eq!(permute(&[1, 2, 3], 1), vec![3, 1, 2]);
        assert_eq!(permute(&[1, 2, 3], 3), vec![1, 2, 3]);
        assert_eq!(permute(&[1, 2, 3], -1), vec![2, 3, 1]);
    }

    #[test]
    fn permute_by_one_looks_unrelated() {
        let h = random_bipolar(10_000, &mut test_rng(7)).unwrap();
        let p = permute(&h, 1);
        let hamming = h.iter().zip(&p).filter(|(a, b)| a != b).count() as f64 / 10_000.0;
        assert!((hamming - 0.5).abs() < 0.02, "{hamming}");
    }

    #[test]
    fn bipolarize_basics() {
        assert_eq!(bipolarize(&[3, -2, 0]), vec![1, -1, 1]);
        let h = vec![5, 0, -7, 1];
        assert_eq!(bipolarize(&bipolarize(&h)), bipolarize(&h));
        let b = vec![1, -1, -1];
        assert_eq!(bipolarize(&b), b);
    }

    #[test]
    fn cosine_basics() {
        let h = random_bipolar(512, &mut test_rng(8)).unwrap();
        let neg: Vec<i32> = h.iter().map(|&x| -x).collect();
        assert!((cosine_similarity(&h, &h).unwrap() - 1.0).abs() < 1e-12);
        assert!((cosine_similarity(&h, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(cosine_similarity(&h, &vec![0; 512]).is_err());
        assert!(cosine_similarity(&h, &[1]).is_err());
    }

    #[test]
    fn item_memory_regenerates_identically() {
        let a = ItemMemory::generate(128, 16, 8, 7, ValueEncoding::Level).unwrap();
        let b = ItemMemory::generate(128, 16, 8, 7, ValueEncoding::Level).unwrap();
        assert_eq!(a.position_hvs(), b.position_hvs());
        assert_eq!(a.value_hvs(), b.value_hvs());
        for hv in a.position_hvs().iter().chain(a.value_hvs()) {
            assert!(is_bipolar(hv));
        }
    }

    #[test]
    fn level_values_interpolate_between_extremes() {
        let dim = 10_000;
        let im = ItemMemory::generate(dim, 1, 256, 11, ValueEncoding::Level).unwrap();
        let v = im.value_hvs();
        // Exactly D/2 flips separate the extremes, and flip counts grow
        // monotonically with the intensity.
        let diff = |a: &[i32], b: &[i32]| a.iter().zip(b).filter(|(x, y)| x != y).count();
        assert_eq!(diff(&v[0], &v[255]), dim / 2);
        for w in v.windows(2) {
            assert!(diff(&v[0], &w[0]) <= diff(&v[0], &w[1]));
        }
        let mid = cosine_similarity(&v[0], &v[128]).unwrap();
        assert!((mid - 0.5).abs() < 0.05, "{mid}");
    }

    #[test]
    fn random_values_are_mutually_unrelated() {
        let im = ItemMemory::generate(10_000, 1, 4, 11, ValueEncoding::Random).unwrap();
        let v = im.value_hvs();
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                assert!(cosine_similarity(&v[i], &v[j]).unwrap().abs() < 0.05);
            }
        }
    }

    #[test]
    fn encode_single_pixel_is_a_pure_bind() {
        let im = ItemMemory::generate(256, 1, 16, 3, ValueEncoding::Level).unwrap();
        let got = im.encode_sample(&[9]).unwrap();
        let want = bind(&im.position_hvs()[0], &im.value_hvs()[9]).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn encode_checks_pixel_count_and_range() {
        let im = ItemMemory::generate(64, 4, 16, 3, ValueEncoding::Level).unwrap();
        assert!(im.encode_sample(&[0, 1, 2]).is_err());
        assert!(im.encode_sample(&[0, 1, 2, 16]).is_err());
        let h = im.encode_sample(&[0, 1, 2, 15]).unwrap();
        assert!(h.iter().all(|&x| x.abs() <= 4));
    }
}
