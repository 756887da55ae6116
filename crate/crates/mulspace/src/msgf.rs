//! MSGF, the binary container for grid functions.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size | field                                           |
//! |--------|------|-------------------------------------------------|
//! | 0      | 4    | magic `b"MSGF"`                                 |
//! | 4      | 2    | `u16` format version, currently 1               |
//! | 6      | 1    | `u8` dimension `n` (1 or 2)                     |
//! | 7      | 1    | `u8` side: 0 = space, 1 = frequency             |
//! | 8      | 4    | `u32` points per axis `N`                       |
//! | 12     | 4    | `u32` reserved, written as 0                    |
//! | 16     | 8    | `f64` half-width `L`                            |
//! | 24     | 8    | `f64` frequency half-width `Ξ = πN/(2L)`        |
//! | 32     | 16·Nⁿ | `(re, im)` `f64` pairs, row-major natural order |
//!
//! `Ξ` is redundant and checked against `L` on reading, which catches files
//! written with a different grid convention.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use mulspace_core::{Complex64, Grid, GridFunction, Side};

pub const MAGIC: &[u8; 4] = b"MSGF";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum MsgfError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed MSGF data: {0}")]
    Format(String),
}

fn malformed(reason: impl Into<String>) -> MsgfError {
    MsgfError::Format(reason.into())
}

pub fn encode(f: &GridFunction) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.samples().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(grid.dim() as u8);
    out.push(match f.side() {
        Side::Space => 0,
        Side::Frequency => 1,
    });
    out.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&grid.freq_half_width().to_le_bytes());
    for v in f.samples() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<GridFunction, MsgfError> {
    if bytes.len() < HEADER_LEN {
        return Err(malformed(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let dim = bytes[6] as usize;
    let side = match bytes[7] {
        0 => Side::Space,
        1 => Side::Frequency,
        t => return Err(malformed(format!("unknown side tag {t}"))),
    };
    let points = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let half_width = f64_at(bytes, 16);
    let freq_half_width = f64_at(bytes, 24);
    let grid = Grid::new(dim, points, half_width).map_err(|e| malformed(e.to_string()))?;
    let expected = PI * points as f64 / (2.0 * half_width);
    let mismatch = (freq_half_width - expected).abs();
    if mismatch.is_nan() || mismatch > 1e-12 * expected {
        return Err(malformed(format!(
            "stored frequency half-width {freq_half_width} does not match {expected}"
        )));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * grid.len() {
        return Err(malformed(format!(
            "expected {} sample bytes, found {}",
            16 * grid.len(),
            body.len()
        )));
    }
    let samples = body
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    GridFunction::new(grid, side, samples).map_err(|e| malformed(e.to_string()))
}

pub fn write_to(f: &GridFunction, mut w: impl Write) -> io::Result<()> {
    w.write_all(&encode(f))
}

pub fn read_from(mut r: impl Read) -> Result<GridFunction, MsgfError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save(f: &GridFunction, path: &Path) -> io::Result<()> {
    fs::write(path, encode(f))
}

pub fn load(path: &Path) -> Result<GridFunction, MsgfError> {
    decode(&fs::read(path)?)
}
