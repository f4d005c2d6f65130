//! Dataset, model and checkpoint files.
//!
//! Every file has the same frame, all integers little-endian:
//!
//! ```text
//! magic        8 bytes   BRBMDATA | BRBMMODL | BRBMCKPT
//! major, minor u16, u16  format version
//! header_len   u32
//! header       JSON, header_len bytes
//! payload_len  u64
//! payload      payload_len bytes
//! checksum     u64       first 8 bytes of SHA-256(payload), little-endian
//! ```
//!
//! Spins and binary weights are bit-packed, least significant bit first,
//! `+1` stored as 1; each dataset sample starts on a byte boundary and pad
//! bits are written as 0 and ignored on read. Real matrices are row-major
//! `f64` little-endian. A reader accepts any minor version of its major.

use std::io::Write;
use std::path::Path;

use binrbm_core::planted::{PlantMethod, PlantedModel};
use binrbm_core::trainer::{Checkpoint, LowerBoundReport, RngState};
use binrbm_core::{
    BinaryWeights, DatasetMeta, Matrix, ModelShape, PriorMeans, SpinDataset, TrainConfig,
    VariationalParams,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const FORMAT_MAJOR: u16 = 1;
pub const FORMAT_MINOR: u16 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Dataset,
    Model,
    Checkpoint,
}

impl FileKind {
    pub fn magic(self) -> &'static [u8; 8] {
        match self {
            FileKind::Dataset => b"BRBMDATA",
            FileKind::Model => b"BRBMMODL",
            FileKind::Checkpoint => b"BRBMCKPT",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FileKind::Dataset => "dataset",
            FileKind::Model => "model",
            FileKind::Checkpoint => "checkpoint",
        }
    }
}

pub fn checksum(payload: &[u8]) -> u64 {
    let digest = Sha256::digest(payload);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn frame(kind: FileKind, version: (u16, u16), header: &impl Serialize, payload: &[u8]) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(header)?;
    let mut out = Vec::with_capacity(8 + 4 + 4 + header.len() + 8 + payload.len() + 8);
    out.extend_from_slice(kind.magic());
    out.extend_from_slice(&version.0.to_le_bytes());
    out.extend_from_slice(&version.1.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(&checksum(payload).to_le_bytes());
    Ok(out)
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|e| *e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.at..end];
                self.at = end;
                Ok(s)
            }
            None => Err(Error::malformed(self.path, format!("truncated in {what}"))),
        }
    }

    fn array<const K: usize>(&mut self, what: &str) -> Result<[u8; K]> {
        Ok(self.take(K, what)?.try_into().unwrap())
    }
}

fn unframe<'a, H: DeserializeOwned>(path: &'a Path, kind: FileKind, bytes: &'a [u8]) -> Result<(H, &'a [u8])> {
    let mut c = Cursor { path, bytes, at: 0 };
    let magic = c.take(8, "magic").map_err(|_| Error::FormatMagic {
        path: path.into(),
        expected: kind.name(),
    })?;
    if magic != kind.magic() {
        return Err(Error::FormatMagic {
            path: path.into(),
            expected: kind.name(),
        });
    }
    let major = u16::from_le_bytes(c.array("version")?);
    let minor = u16::from_le_bytes(c.array("version")?);
    if major != FORMAT_MAJOR {
        return Err(Error::Version {
            path: path.into(),
            found_major: major,
            found_minor: minor,
            supported: FORMAT_MAJOR,
        });
    }
    let header_len = u32::from_le_bytes(c.array("header length")?) as usize;
    let header = c.take(header_len, "header")?;
    let payload_len = u64::from_le_bytes(c.array("payload length")?);
    let payload_len = usize::try_from(payload_len).map_err(|_| Error::malformed(path, "payload too large"))?;
    let payload = c.take(payload_len, "payload")?;
    let stored = u64::from_le_bytes(c.array("checksum")?);
    if c.at != bytes.len() {
        return Err(Error::malformed(path, "trailing bytes after checksum"));
    }
    let computed = checksum(payload);
    if stored != computed {
        return Err(Error::Checksum {
            path: path.into(),
            stored,
            computed,
        });
    }
    let header = serde_json::from_slice(header).map_err(|e| Error::malformed(path, format!("header: {e}")))?;
    Ok((header, payload))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a crash never leaves a partial file under `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Packs `values` (±1) in rows of `row_len`, each row padded to a byte.
pub fn pack_bits(values: &[i8], row_len: usize) -> Vec<u8> {
    let row_bytes = row_len.div_ceil(8);
    let rows = values.len().checked_div(row_len).unwrap_or(0);
    let mut out = vec![0u8; rows * row_bytes];
    for (r, row) in values.chunks_exact(row_len.max(1)).enumerate() {
        for (k, v) in row.iter().enumerate() {
            if *v > 0 {
                out[r * row_bytes + k / 8] |= 1 << (k % 8);
            }
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8], row_len: usize, rows: usize) -> Option<Vec<i8>> {
    let row_bytes = row_len.div_ceil(8);
    if bytes.len() != rows * row_bytes {
        return None;
    }
    let mut out = Vec::with_capacity(rows * row_len);
    for r in 0..rows {
        let row = &bytes[r * row_bytes..(r + 1) * row_bytes];
        out.extend((0..row_len).map(|k| if row[k / 8] >> (k % 8) & 1 == 1 { 1 } else { -1 }));
    }
    Some(out)
}

fn f64s_to_bytes(values: &[f64], out: &mut Vec<u8>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn bytes_to_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    n_visible: usize,
    n_samples: usize,
    meta: DatasetMeta,
}

pub fn encode_dataset(data: &SpinDataset) -> Result<Vec<u8>> {
    let header = DatasetHeader {
        n_visible: data.n_visible(),
        n_samples: data.len(),
        meta: data.meta.clone(),
    };
    let payload = pack_bits(data.as_flat(), data.n_visible());
    frame(FileKind::Dataset, (FORMAT_MAJOR, FORMAT_MINOR), &header, &payload)
}

pub fn decode_dataset(path: &Path, bytes: &[u8]) -> Result<SpinDataset> {
    let (h, payload): (DatasetHeader, _) = unframe(path, FileKind::Dataset, bytes)?;
    let spins = unpack_bits(payload, h.n_visible, h.n_samples)
        .ok_or_else(|| Error::malformed(path, "payload size does not match header"))?;
    Ok(SpinDataset::from_flat(h.n_visible, spins, h.meta)?)
}

pub fn write_dataset(path: &Path, data: &SpinDataset) -> Result<()> {
    write_atomic(path, &encode_dataset(data)?)
}

pub fn read_dataset(path: &Path) -> Result<SpinDataset> {
    decode_dataset(path, &read_file(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    n_visible: usize,
    n_hidden: usize,
    beta: f64,
    correlation: f64,
    seed: u64,
    method: PlantMethod,
}

pub fn encode_model(model: &PlantedModel) -> Result<Vec<u8>> {
    let shape = model.shape();
    let header = ModelHeader {
        n_visible: shape.n_visible,
        n_hidden: shape.n_hidden,
        beta: model.beta,
        correlation: model.correlation,
        seed: model.seed,
        method: model.method,
    };
    let payload = pack_bits(model.weights.as_slice(), shape.n_params());
    frame(FileKind::Model, (FORMAT_MAJOR, FORMAT_MINOR), &header, &payload)
}

pub fn decode_model(path: &Path, bytes: &[u8]) -> Result<PlantedModel> {
    let (h, payload): (ModelHeader, _) = unframe(path, FileKind::Model, bytes)?;
    let shape = ModelShape::new(h.n_visible, h.n_hidden)?;
    let xi = unpack_bits(payload, shape.n_params(), 1)
        .ok_or_else(|| Error::malformed(path, "payload size does not match header"))?;
    Ok(PlantedModel {
        weights: BinaryWeights::new(shape, xi)?,
        beta: h.beta,
        correlation: h.correlation,
        seed: h.seed,
        method: h.method,
    })
}

pub fn write_model(path: &Path, model: &PlantedModel) -> Result<()> {
    write_atomic(path, &encode_model(model)?)
}

pub fn read_model(path: &Path) -> Result<PlantedModel> {
    decode_model(path, &read_file(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    step: usize,
    n_visible: usize,
    n_hidden: usize,
    config: TrainConfig,
    rng_state: RngState,
    trajectory_tail: Option<LowerBoundReport>,
}

/// Payload is `λ` followed by the prior means, both `N×P`.
pub fn encode_checkpoint(ck: &Checkpoint) -> Result<Vec<u8>> {
    let shape = ck.lambda.shape();
    let header = CheckpointHeader {
        step: ck.step,
        n_visible: shape.n_visible,
        n_hidden: shape.n_hidden,
        config: ck.config.clone(),
        rng_state: ck.rng_state,
        trajectory_tail: ck.trajectory_tail.clone(),
    };
    let mut payload = Vec::with_capacity(16 * shape.n_params());
    f64s_to_bytes(ck.lambda.lambda().as_slice(), &mut payload);
    f64s_to_bytes(ck.prior.means().as_slice(), &mut payload);
    frame(FileKind::Checkpoint, (FORMAT_MAJOR, FORMAT_MINOR), &header, &payload)
}

pub fn decode_checkpoint(path: &Path, bytes: &[u8]) -> Result<Checkpoint> {
    let (h, payload): (CheckpointHeader, _) = unframe(path, FileKind::Checkpoint, bytes)?;
    let shape = ModelShape::new(h.n_visible, h.n_hidden)?;
    let k = shape.n_params();
    if payload.len() != 16 * k {
        return Err(Error::malformed(path, "payload size does not match header"));
    }
    let (lam, prior) = payload.split_at(8 * k);
    let lambda = VariationalParams::new(shape, Matrix::from_vec(h.n_visible, h.n_hidden, bytes_to_f64s(lam))?)?;
    let prior = PriorMeans::new(shape, Matrix::from_vec(h.n_visible, h.n_hidden, bytes_to_f64s(prior))?)?;
    Ok(Checkpoint {
        step: h.step,
        lambda,
        prior,
        config: h.config,
        rng_state: h.rng_state,
        trajectory_tail: h.trajectory_tail,
    })
}

pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    write_atomic(path, &encode_checkpoint(ck)?)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(path, &read_file(path)?)
}

/// Re-frames an encoded file under another version; for compatibility tests.
#[doc(hidden)]
pub fn with_version(bytes: &[u8], major: u16, minor: u16) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out[8..10].copy_from_slice(&major.to_le_bytes());
    out[10..12].copy_from_slice(&minor.to_le_bytes());
    out
}
