//! `SHKW1` binary snapshots: magic, then little-endian `u32 d`,
//! `u32 counts[d]`, `f64 box[2d]` (all lows then all highs), `f64 time`
//! and the cell values in row-major order.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::grid::{Field, Grid, GridError};

pub const MAGIC: &[u8; 5] = b"SHKW1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("snapshot file is truncated: needed {needed} bytes, found {found}")]
    TruncatedFile { needed: usize, found: usize },
    #[error("snapshot header is inconsistent: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn encode_snapshot(field: &Field, time: f64) -> Vec<u8> {
    let grid = field.grid();
    let d = grid.dim();
    let mut out = Vec::with_capacity(5 + 4 + 4 * d + 16 * d + 8 + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for &n in grid.counts() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in grid.lo().iter().chain(grid.hi().iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, needed_total: usize) -> Result<&[u8], SnapshotError> {
        if self.pos + n > self.bytes.len() {
            return Err(SnapshotError::TruncatedFile {
                needed: needed_total.max(self.pos + n),
                found: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, SnapshotError> {
        let b = self.take(4, 0)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }
    fn f64(&mut self, needed: usize) -> Result<f64, SnapshotError> {
        let b = self.take(8, needed)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
}

/// Cell size reproducing `hi = lo + n dx` exactly on every axis; the
/// quotient `(hi - lo) / n` may be off by an ulp.
fn recover_dx(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<f64, SnapshotError> {
    let guess = (hi[0] - lo[0]) / counts[0] as f64;
    let fits = |dx: f64| {
        lo.iter()
            .zip(hi)
            .zip(counts)
            .all(|((l, h), &n)| l + n as f64 * dx == *h)
    };
    let mut cand = guess;
    for _ in 0..4 {
        if fits(cand) {
            return Ok(cand);
        }
        cand = f64::from_bits(cand.to_bits() + 1);
    }
    cand = guess;
    for _ in 0..4 {
        cand = f64::from_bits(cand.to_bits() - 1);
        if fits(cand) {
            return Ok(cand);
        }
    }
    let close = lo
        .iter()
        .zip(hi)
        .zip(counts)
        .all(|((l, h), &n)| ((h - l) / n as f64 - guess).abs() <= 1e-12 * guess.abs());
    if close {
        Ok(guess)
    } else {
        Err(SnapshotError::BadHeader("cells are not cubes".into()))
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(Field, f64), SnapshotError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let d = r.u32()? as usize;
    if !(1..=8).contains(&d) {
        return Err(SnapshotError::BadHeader(format!("dimension {d}")));
    }
    let counts: Vec<usize> = (0..d).map(|_| r.u32().map(|n| n as usize)).collect::<Result<_, _>>()?;
    let cells: usize = counts.iter().product();
    let needed = MAGIC.len() + 4 + 4 * d + 16 * d + 8 + 8 * cells;
    let lo: Vec<f64> = (0..d).map(|_| r.f64(needed)).collect::<Result<_, _>>()?;
    let hi: Vec<f64> = (0..d).map(|_| r.f64(needed)).collect::<Result<_, _>>()?;
    let time = r.f64(needed)?;
    let data: Vec<f64> = (0..cells).map(|_| r.f64(needed)).collect::<Result<_, _>>()?;
    if r.pos != bytes.len() {
        return Err(SnapshotError::BadHeader(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let dx = recover_dx(&lo, &hi, &counts)?;
    let grid = Grid::new(counts, lo, dx)?;
    Ok((Field::new(grid, data)?, time))
}

pub fn write_snapshot(field: &Field, time: f64, path: &Path) -> Result<(), SnapshotError> {
    fs::write(path, encode_snapshot(field, time))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64), SnapshotError> {
    decode_snapshot(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(vec![16, 16], vec![-0.3, 1.7], 0.1).unwrap();
        let f = Field::from_fn(&g, |x| (x[0] * 13.1).sin() * x[1].exp());
        let (back, t) = decode_snapshot(&encode_snapshot(&f, 2.5)).unwrap();
        assert_eq!(t, 2.5);
        assert_eq!(back.grid(), f.grid());
        assert!(back.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn bad_magic_and_truncation() {
        let g = Grid::centered(vec![4, 4], 1.0).unwrap();
        let mut bytes = encode_snapshot(&Field::constant(&g, 1.0), 0.0);
        assert!(matches!(decode_snapshot(b"SHKW2rest"), Err(SnapshotError::BadMagic)));
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(decode_snapshot(&bytes), Err(SnapshotError::TruncatedFile { .. })));
        assert!(matches!(decode_snapshot(&bytes[..7]), Err(SnapshotError::TruncatedFile { .. })));
    }
}
