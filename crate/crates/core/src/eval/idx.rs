//! IDX image/label file ingestion.
//!
//! Big-endian 32-bit magic (2051 for images, 2049 for labels), big-endian
//! dimension sizes, unsigned-byte payload. Images are flattened row-major
//! and scaled by 1/255. Parse errors carry the byte offset of the fault.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 2051;
const LABEL_MAGIC: u32 = 2049;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn fail(&self, detail: impl Into<String>) -> Error {
        Error::IdxFormat {
            offset: self.pos as u64,
            detail: detail.into(),
        }
    }

    fn read_u32_be(&mut self, field: &str) -> Result<u32> {
        if self.pos + 4 > self.bytes.len() {
            return Err(self.fail(format!("file truncated while reading {field}")));
        }
        let v = u32::from_be_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn read_payload(&mut self, count: usize, field: &str) -> Result<&'a [u8]> {
        if self.pos + count > self.bytes.len() {
            let available = self.bytes.len() - self.pos;
            return Err(Error::IdxFormat {
                offset: self.bytes.len() as u64,
                detail: format!(
                    "file truncated: {field} needs {count} bytes, {available} available"
                ),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + count];
        self.pos += count;
        Ok(slice)
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.fail(format!(
                "{} trailing bytes after declared payload",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn parse_images(bytes: &[u8]) -> Result<(Vec<f32>, usize, usize)> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.read_u32_be("image magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::IdxFormat {
            offset: 0,
            detail: format!("image magic {magic}, expected {IMAGE_MAGIC}"),
        });
    }
    let count = cur.read_u32_be("image count")? as usize;
    let rows = cur.read_u32_be("row count")? as usize;
    let cols = cur.read_u32_be("column count")? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::IdxFormat {
            offset: 8,
            detail: format!("degenerate image shape {rows}x{cols}"),
        });
    }
    let pixels = cur.read_payload(count * rows * cols, "pixel data")?;
    cur.expect_end()?;
    let inputs = pixels.iter().map(|&p| f32::from(p) / 255.0).collect();
    Ok((inputs, count, rows * cols))
}

fn parse_labels(bytes: &[u8]) -> Result<(Vec<usize>, usize)> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.read_u32_be("label magic")?;
    if magic != LABEL_MAGIC {
        return Err(Error::IdxFormat {
            offset: 0,
            detail: format!("label magic {magic}, expected {LABEL_MAGIC}"),
        });
    }
    let count = cur.read_u32_be("label count")? as usize;
    let raw = cur.read_payload(count, "label data")?;
    cur.expect_end()?;
    Ok((raw.iter().map(|&b| b as usize).collect(), count))
}

/// Loads a paired image/label IDX file set into a dataset.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let image_bytes = fs::read(&images_path)?;
    let label_bytes = fs::read(&labels_path)?;
    let (inputs, image_count, dim) = parse_images(&image_bytes)?;
    let (labels, label_count) = parse_labels(&label_bytes)?;
    if image_count != label_count {
        // Offset 4 is where the disagreeing count lives in the label file.
        return Err(Error::IdxFormat {
            offset: 4,
            detail: format!("label count {label_count} does not match image count {image_count}"),
        });
    }
    let class_count = labels.iter().copied().max().map_or(1, |m| m + 1);
    Dataset::new(inputs, labels, dim, class_count)
}

/// Writes a dataset as a square-image IDX pair (values quantized to bytes).
/// The sample dimension must be a perfect square.
pub fn save_idx(
    data: &Dataset,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    let side = (data.input_dim() as f64).sqrt().round() as usize;
    if side * side != data.input_dim() {
        return Err(Error::InvalidConfig(format!(
            "sample dimension {} is not a square image",
            data.input_dim()
        )));
    }
    let mut images = Vec::with_capacity(16 + data.len() * data.input_dim());
    images.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    images.extend_from_slice(&(data.len() as u32).to_be_bytes());
    images.extend_from_slice(&(side as u32).to_be_bytes());
    images.extend_from_slice(&(side as u32).to_be_bytes());
    for i in 0..data.len() {
        images.extend(data.sample(i).iter().map(|&v| (v * 255.0).round() as u8));
    }
    fs::write(images_path, images)?;

    let mut labels = Vec::with_capacity(8 + data.len());
    labels.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    labels.extend_from_slice(&(data.len() as u32).to_be_bytes());
    labels.extend(data.labels.iter().map(|&l| l as u8));
    fs::write(labels_path, labels)?;
    Ok(())
}
