//! MNIST-style dataset loading and client partitioning.
//!
//! Files are the classic IDX format (big-endian, magic-numbered), optionally
//! gzip-compressed; compression is detected from the leading bytes, not the
//! file name. Partitioning supports a balanced scheme (each client gets the
//! same count of every class) and a label-sorted shard scheme where each
//! client receives a few contiguous shards and therefore sees only a few
//! distinct labels.

use std::fmt;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Pixels per MNIST image.
pub const IMAGE_PIXELS: usize = 784;
/// Distinct pixel intensities.
pub const PIXEL_LEVELS: usize = 256;
/// Digit classes.
pub const NUM_DIGITS: usize = 10;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Labeled images with a shared row length, stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    row_len: usize,
    pixels: Vec<u8>,
    labels: Vec<u8>,
}

impl fmt::Debug for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dataset")
            .field("name", &self.name)
            .field("rows", &self.labels.len())
            .field("row_len", &self.row_len)
            .finish()
    }
}

impl Dataset {
    pub fn from_parts(
        name: impl Into<String>,
        row_len: usize,
        pixels: Vec<u8>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if row_len == 0 {
            return Err(Error::InvalidArgument("row length must be positive".into()));
        }
        if pixels.len() != row_len * labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} pixels cannot hold {} rows of {} bytes",
                pixels.len(),
                labels.len(),
                row_len
            )));
        }
        Ok(Self {
            name: name.into(),
            row_len,
            pixels,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row_len(&self) -> usize {
        self.row_len
    }

    pub fn image(&self, i: usize) -> &[u8] {
        &self.pixels[i * self.row_len..(i + 1) * self.row_len]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u8)> {
        self.pixels.chunks_exact(self.row_len).zip(self.labels.iter().copied())
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(indices.len() * self.row_len);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of bounds for {} rows",
                    self.len()
                )));
            }
            pixels.extend_from_slice(self.image(i));
            labels.push(self.labels[i]);
        }
        Self::from_parts(self.name.clone(), self.row_len, pixels, labels)
    }

    fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); NUM_DIGITS];
        for (i, &label) in self.labels.iter().enumerate() {
            by_class[label as usize].push(i);
        }
        by_class
    }
}

fn read_file_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| format_err(path, format!("cannot read: {e}")))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| format_err(path, format!("gzip decode failed: {e}")))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn format_err(path: &Path, what: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        what: what.into(),
    }
}

fn parse_images(buf: &[u8], path: &Path) -> Result<(usize, Vec<u8>)> {
    let mut cur = Cursor::new(buf);
    let magic = cur
        .read_u32::<BigEndian>()
        .map_err(|_| format_err(path, "truncated before image magic"))?;
    if magic != IMAGES_MAGIC {
        return Err(format_err(
            path,
            format!("bad image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        ));
    }
    let mut dim = || {
        cur.read_u32::<BigEndian>()
            .map_err(|_| format_err(path, "truncated image header"))
    };
    let (count, rows, cols) = (dim()? as usize, dim()? as usize, dim()? as usize);
    let row_len = rows
        .checked_mul(cols)
        .filter(|&n| n > 0)
        .ok_or_else(|| format_err(path, format!("bad image shape {rows}x{cols}")))?;
    let expected = count
        .checked_mul(row_len)
        .ok_or_else(|| format_err(path, "image payload size overflows"))?;
    let body = &buf[cur.position() as usize..];
    if body.len() < expected {
        return Err(format_err(
            path,
            format!("truncated pixel data: header promises {expected} bytes, found {}", body.len()),
        ));
    }
    if body.len() > expected {
        return Err(format_err(
            path,
            format!("{} trailing bytes after pixel data", body.len() - expected),
        ));
    }
    Ok((row_len, body.to_vec()))
}

fn parse_labels(buf: &[u8], path: &Path) -> Result<Vec<u8>> {
    let mut cur = Cursor::new(buf);
    let magic = cur
        .read_u32::<BigEndian>()
        .map_err(|_| format_err(path, "truncated before label magic"))?;
    if magic != LABELS_MAGIC {
        return Err(format_err(
            path,
            format!("bad label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        ));
    }
    let count = cur
        .read_u32::<BigEndian>()
        .map_err(|_| format_err(path, "truncated label header"))? as usize;
    let body = &buf[cur.position() as usize..];
    if body.len() < count {
        return Err(format_err(
            path,
            format!("truncated label data: header promises {count} bytes, found {}", body.len()),
        ));
    }
    if body.len() > count {
        return Err(format_err(
            path,
            format!("{} trailing bytes after label data", body.len() - count),
        ));
    }
    if let Some(pos) = body.iter().position(|&l| l as usize >= NUM_DIGITS) {
        return Err(format_err(
            path,
            format!("label {} at row {pos} outside 0-9", body[pos]),
        ));
    }
    Ok(body.to_vec())
}

/// Loads an image/label file pair, cross-checking the row counts.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let (row_len, pixels) = parse_images(&read_file_maybe_gz(images_path)?, images_path)?;
    let labels = parse_labels(&read_file_maybe_gz(labels_path)?, labels_path)?;
    if pixels.len() != row_len * labels.len() {
        return Err(format_err(
            labels_path,
            format!(
                "label count {} does not match image count {}",
                labels.len(),
                pixels.len() / row_len
            ),
        ));
    }
    let name = images_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".into());
    Dataset::from_parts(name, row_len, pixels, labels)
}

/// How a training pool is divided among clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Iid,
    NoniidShards,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionSpec {
    pub mode: PartitionMode,
    pub num_clients: usize,
    /// Images of every class per client (balanced mode).
    pub per_class_per_client: usize,
    /// Shard count (sorted-shard mode); must equal num_clients * shards_per_client.
    pub num_shards: usize,
    pub shards_per_client: usize,
    pub seed: u64,
}

impl PartitionSpec {
    pub fn iid(num_clients: usize, per_class_per_client: usize, seed: u64) -> Self {
        Self {
            mode: PartitionMode::Iid,
            num_clients,
            per_class_per_client,
            num_shards: 0,
            shards_per_client: 0,
            seed,
        }
    }

    pub fn noniid_shards(num_clients: usize, shards_per_client: usize, seed: u64) -> Self {
        Self {
            mode: PartitionMode::NoniidShards,
            num_clients,
            per_class_per_client: 0,
            num_shards: num_clients * shards_per_client,
            shards_per_client,
            seed,
        }
    }
}

/// Row indices of a seeded draw of `per_class` samples of every class
/// present in the dataset, without replacement, in ascending order.
pub fn subsample_indices(ds: &Dataset, per_class: usize, seed: u64) -> Result<Vec<usize>> {
    let mut chosen = Vec::with_capacity(per_class * NUM_DIGITS);
    for (class, members) in ds.indices_by_class().iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < per_class {
            return Err(Error::InvalidArgument(format!(
                "class {class} has {} samples, need {per_class}",
                members.len()
            )));
        }
        let mut rng = stream_rng(seed, Stream::Subsample, &[class as u64]);
        let picks = rand::seq::index::sample(&mut rng, members.len(), per_class);
        chosen.extend(picks.iter().map(|i| members[i]));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Seeded draw of `per_class` samples of every class present, without
/// replacement.
pub fn subsample(ds: &Dataset, per_class: usize, seed: u64) -> Result<Dataset> {
    ds.select(&subsample_indices(ds, per_class, seed)?)
}

/// Seeded uniform draw of `count` rows from those not listed in `exclude`.
/// Class balance is not enforced. Returns ascending row indices.
pub fn draw_indices_excluding(
    ds: &Dataset,
    count: usize,
    exclude: &[usize],
    seed: u64,
) -> Result<Vec<usize>> {
    let excluded: std::collections::HashSet<usize> = exclude.iter().copied().collect();
    let pool: Vec<usize> = (0..ds.len()).filter(|i| !excluded.contains(i)).collect();
    if pool.len() < count {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} rows from {} remaining",
            pool.len()
        )));
    }
    let mut rng = stream_rng(seed, Stream::MainServerDraw, &[]);
    let picks = rand::seq::index::sample(&mut rng, pool.len(), count);
    let mut chosen: Vec<usize> = picks.iter().map(|i| pool[i]).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Balanced partition: each client receives `per_class_per_client` samples of
/// every class present, pairwise disjoint across clients.
pub fn partition_iid(ds: &Dataset, spec: &PartitionSpec) -> Result<Vec<Dataset>> {
    if spec.mode != PartitionMode::Iid {
        return Err(Error::InvalidArgument("partition spec is not balanced mode".into()));
    }
    if spec.num_clients == 0 || spec.per_class_per_client == 0 {
        return Err(Error::InvalidArgument("client and per-class counts must be positive".into()));
    }
    let need = spec.num_clients * spec.per_class_per_client;
    let mut per_client: Vec<Vec<usize>> = vec![Vec::new(); spec.num_clients];
    for (class, members) in ds.indices_by_class().iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < need {
            return Err(Error::InvalidArgument(format!(
                "class {class} has {} samples, need {need}",
                members.len()
            )));
        }
        let mut shuffled = members.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut stream_rng(spec.seed, Stream::Partition, &[class as u64]));
        for (c, chunk) in shuffled[..need].chunks(spec.per_class_per_client).enumerate() {
            per_client[c].extend_from_slice(chunk);
        }
    }
    per_client
        .into_iter()
        .map(|mut ix| {
            ix.sort_unstable();
            ds.select(&ix)
        })
        .collect()
}

/// Sorted-shard partition: rows are stably sorted by (label, original index),
/// cut into `num_shards` contiguous shards, and each client receives
/// `shards_per_client` shards chosen by a seeded permutation.
pub fn partition_noniid_shards(ds: &Dataset, spec: &PartitionSpec) -> Result<Vec<Dataset>> {
    if spec.mode != PartitionMode::NoniidShards {
        return Err(Error::InvalidArgument("partition spec is not shard mode".into()));
    }
    if spec.num_shards != spec.num_clients * spec.shards_per_client {
        return Err(Error::InvalidArgument(format!(
            "{} shards cannot cover {} clients x {} shards each",
            spec.num_shards, spec.num_clients, spec.shards_per_client
        )));
    }
    if spec.num_shards == 0 || !ds.len().is_multiple_of(spec.num_shards) {
        return Err(Error::InvalidArgument(format!(
            "{} rows not divisible into {} shards",
            ds.len(),
            spec.num_shards
        )));
    }
    let shard_len = ds.len() / spec.num_shards;
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by_key(|&i| (ds.label(i), i));
    let mut shard_ids: Vec<usize> = (0..spec.num_shards).collect();
    use rand::seq::SliceRandom;
    shard_ids.shuffle(&mut stream_rng(spec.seed, Stream::Partition, &[]));
    shard_ids
        .chunks(spec.shards_per_client)
        .map(|shards| {
            let mut ix: Vec<usize> = shards
                .iter()
                .flat_map(|&s| order[s * shard_len..(s + 1) * shard_len].iter().copied())
                .collect();
            ix.sort_unstable();
            ds.select(&ix)
        })
        .collect()
}

/// Dispatches on the partition mode.
pub fn partition(ds: &Dataset, spec: &PartitionSpec) -> Result<Vec<Dataset>> {
    match spec.mode {
        PartitionMode::Iid => partition_iid(ds, spec),
        PartitionMode::NoniidShards => partition_noniid_shards(ds, spec),
    }
}
