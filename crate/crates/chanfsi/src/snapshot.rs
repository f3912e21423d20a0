//! Binary field snapshots.
//!
//! Layout, little-endian: a 64-byte header (`CFSISNAP`, `u32` version,
//! `u32` layer tag, `u64` time samples, nx, ny, nz, components, eight
//! reserved zero bytes) followed by the samples as `f64` in row-major
//! `(t, x, y, z, c)` order.

use std::io::{Read, Write};
use std::path::Path;

use chanfsi_core::{Layer, SpaceTimeField};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"CFSISNAP";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a snapshot file")]
    Magic,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("unknown layer tag {0}")]
    Layer(u32),
    #[error("payload holds {got} bytes, header promises {expected}")]
    Length { expected: u64, got: u64 },
}

pub fn write_snapshot<W: Write>(mut out: W, field: &SpaceTimeField) -> Result<(), SnapshotError> {
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(MAGIC);
    header[8..12].copy_from_slice(&VERSION.to_le_bytes());
    header[12..16].copy_from_slice(&field.layer().tag().to_le_bytes());
    for (i, d) in field.dims().iter().enumerate() {
        let at = 16 + 8 * i;
        header[at..at + 8].copy_from_slice(&(*d as u64).to_le_bytes());
    }
    out.write_all(&header)?;
    let mut payload = Vec::with_capacity(field.as_slice().len() * 8);
    for v in field.as_slice() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&payload)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<SpaceTimeField, SnapshotError> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(SnapshotError::Magic);
    }
    let word = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap());
    let version = word(8);
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let tag = word(12);
    let layer = Layer::from_tag(tag).ok_or(SnapshotError::Layer(tag))?;
    let dims: [u64; 5] = std::array::from_fn(|i| u64::from_le_bytes(header[16 + 8 * i..24 + 8 * i].try_into().unwrap()));
    let expected = dims.iter().try_fold(8u64, |acc, &d| acc.checked_mul(d)).unwrap_or(u64::MAX);
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    if payload.len() as u64 != expected {
        return Err(SnapshotError::Length { expected, got: payload.len() as u64 });
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    SpaceTimeField::from_vec(layer, dims.map(|d| d as usize), data)
        .ok_or(SnapshotError::Length { expected, got: payload.len() as u64 })
}

pub fn save(path: &Path, field: &SpaceTimeField) -> Result<(), SnapshotError> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_snapshot(&mut out, field)?;
    out.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SpaceTimeField, SnapshotError> {
    read_snapshot(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpaceTimeField {
        let data = (0..2 * 4 * 2 * 3 * 3).map(|i| i as f64 * 0.5 - 7.25).collect();
        SpaceTimeField::from_vec(Layer::Elastic, [2, 4, 2, 3, 3], data).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + f.as_slice().len() * 8);
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(buf[56..64], [0u8; 8]);
        assert_eq!(read_snapshot(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &sample()).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_snapshot(bad.as_slice()), Err(SnapshotError::Magic)));
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(matches!(read_snapshot(bad.as_slice()), Err(SnapshotError::Version(9))));
        let mut bad = buf.clone();
        bad[12] = 200;
        assert!(matches!(read_snapshot(bad.as_slice()), Err(SnapshotError::Layer(200))));
        buf.pop();
        assert!(matches!(read_snapshot(buf.as_slice()), Err(SnapshotError::Length { .. })));
    }
}
