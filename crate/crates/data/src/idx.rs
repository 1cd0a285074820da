//! IDX file reading and writing, exactly as MNIST is distributed:
//! big-endian headers, magic 0x00000803 for image files (count, rows, cols)
//! and 0x00000801 for label files (count), then unsigned bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder};

use crate::dataset::{LabeledDataset, Split};
use crate::error::DataError;
use crate::Result;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

pub struct RawImages {
    pub pixels: Vec<u8>,
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
}

pub fn read_idx_images(path: &Path) -> Result<RawImages> {
    let bytes = read_file(path)?;
    let name = path.display().to_string();
    need(&bytes, 16, &name)?;
    let magic = BigEndian::read_u32(&bytes[0..4]);
    if magic != IMAGE_MAGIC {
        return Err(DataError::BadMagic {
            path: name,
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = BigEndian::read_u32(&bytes[4..8]) as usize;
    let rows = BigEndian::read_u32(&bytes[8..12]) as usize;
    let cols = BigEndian::read_u32(&bytes[12..16]) as usize;
    need(&bytes, 16 + count * rows * cols, &name)?;
    Ok(RawImages {
        pixels: bytes[16..16 + count * rows * cols].to_vec(),
        count,
        rows,
        cols,
    })
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_file(path)?;
    let name = path.display().to_string();
    need(&bytes, 8, &name)?;
    let magic = BigEndian::read_u32(&bytes[0..4]);
    if magic != LABEL_MAGIC {
        return Err(DataError::BadMagic {
            path: name,
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = BigEndian::read_u32(&bytes[4..8]) as usize;
    need(&bytes, 8 + count, &name)?;
    Ok(bytes[8..8 + count].to_vec())
}

/// Loads an image/label file pair into a dataset, scaling pixels from
/// [0, 255] to [0, 1] by division by 255.
pub fn load_idx(images_path: &Path, labels_path: &Path, split: Split) -> Result<LabeledDataset> {
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.count != labels.len() {
        return Err(DataError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    let pixels: Vec<f32> = images.pixels.iter().map(|&b| b as f32 / 255.0).collect();
    LabeledDataset::new(pixels, labels, images.rows, images.cols, split)
}

pub fn write_idx_images(path: &Path, pixels: &[u8], count: usize, rows: usize, cols: usize) -> Result<()> {
    assert_eq!(pixels.len(), count * rows * cols);
    let mut bytes = Vec::with_capacity(16 + pixels.len());
    let mut header = [0u8; 16];
    BigEndian::write_u32(&mut header[0..4], IMAGE_MAGIC);
    BigEndian::write_u32(&mut header[4..8], count as u32);
    BigEndian::write_u32(&mut header[8..12], rows as u32);
    BigEndian::write_u32(&mut header[12..16], cols as u32);
    bytes.extend_from_slice(&header);
    bytes.extend_from_slice(pixels);
    write_file(path, &bytes)
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + labels.len());
    let mut header = [0u8; 8];
    BigEndian::write_u32(&mut header[0..4], LABEL_MAGIC);
    BigEndian::write_u32(&mut header[4..8], labels.len() as u32);
    bytes.extend_from_slice(&header);
    bytes.extend_from_slice(labels);
    write_file(path, &bytes)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let tmp = path.with_extension("tmp-write");
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(bytes).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

fn need(bytes: &[u8], wanted: usize, path: &str) -> Result<()> {
    if bytes.len() < wanted {
        return Err(DataError::Truncated {
            path: path.to_string(),
            expected: wanted - bytes.len(),
        });
    }
    Ok(())
}
