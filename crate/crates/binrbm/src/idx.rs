//! IDX image and label files, as distributed with MNIST.
//!
//! All header integers are big-endian. Image files start with magic
//! `0x00000803`, then count, rows and cols; label files with `0x00000801` and
//! a count. The payload is one unsigned byte per pixel or label.

use std::path::Path;

use binrbm_core::{DataSource, DatasetMeta, SpinDataset};

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const DEFAULT_THRESHOLD: u8 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, k: usize) -> &[u8] {
        let len = self.rows * self.cols;
        &self.pixels[k * len..(k + 1) * len]
    }

    /// Header and pixels in IDX layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.pixels.len());
        for v in [IMAGE_MAGIC, self.count as u32, self.rows as u32, self.cols as u32] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn check_header(path: &Path, bytes: &[u8], magic: u32, header_len: usize) -> Result<()> {
    if bytes.len() < 4 {
        return Err(Error::IdxTruncated {
            path: path.into(),
            needed: header_len as u64,
            have: bytes.len() as u64,
        });
    }
    let found = be_u32(bytes, 0);
    if found != magic {
        return Err(Error::IdxMagic {
            path: path.into(),
            found,
            expected: magic,
        });
    }
    if bytes.len() < header_len {
        return Err(Error::IdxTruncated {
            path: path.into(),
            needed: header_len as u64,
            have: bytes.len() as u64,
        });
    }
    Ok(())
}

fn check_payload(path: &Path, bytes: &[u8], header_len: usize, payload: u64) -> Result<()> {
    let expected = header_len as u64 + payload;
    let found = bytes.len() as u64;
    if found < expected {
        Err(Error::IdxTruncated {
            path: path.into(),
            needed: expected,
            have: found,
        })
    } else if found > expected {
        Err(Error::IdxLength {
            path: path.into(),
            expected,
            found,
        })
    } else {
        Ok(())
    }
}

/// Parses an in-memory image file; `path` only labels errors.
pub fn parse_images(path: &Path, bytes: &[u8]) -> Result<IdxImages> {
    check_header(path, bytes, IMAGE_MAGIC, 16)?;
    let count = be_u32(bytes, 4) as usize;
    let rows = be_u32(bytes, 8) as usize;
    let cols = be_u32(bytes, 12) as usize;
    check_payload(path, bytes, 16, count as u64 * rows as u64 * cols as u64)?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn parse_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>> {
    check_header(path, bytes, LABEL_MAGIC, 8)?;
    let count = be_u32(bytes, 4) as u64;
    check_payload(path, bytes, 8, count)?;
    Ok(bytes[8..].to_vec())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_images(path: &Path) -> Result<IdxImages> {
    parse_images(path, &read(path)?)
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    parse_labels(path, &read(path)?)
}

/// Pixels `≥ threshold` become `+1`, the rest `−1`.
pub fn binarize(images: &IdxImages, limit: Option<usize>, threshold: u8) -> Vec<i8> {
    let count = limit.map_or(images.count, |l| l.min(images.count));
    images.pixels[..count * images.rows * images.cols]
        .iter()
        .map(|p| if *p >= threshold { 1 } else { -1 })
        .collect()
}

/// First `limit` images of `path`, binarized, as a dataset with `N = rows·cols`.
pub fn load_mnist(path: &Path, limit: Option<usize>, threshold: u8) -> Result<SpinDataset> {
    let images = read_images(path)?;
    if images.count == 0 || images.rows * images.cols == 0 {
        return Err(Error::malformed(path, "no images"));
    }
    let spins = binarize(&images, limit, threshold);
    let meta = DatasetMeta {
        source: DataSource::Mnist,
        threshold: Some(threshold),
        source_file: Some(path.display().to_string()),
        first_index: Some(0),
        ..DatasetMeta::default()
    };
    Ok(SpinDataset::from_flat(images.rows * images.cols, spins, meta)?)
}
