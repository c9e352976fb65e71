//! Binary snapshot files.
//!
//! Layout, all little-endian: magic `b"BOVF"`, format version (`u32`), point
//! count `N` (`u64`), box length `L` (`f64`), time `t` (`f64`), then `N`
//! samples (`f64`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

pub const MAGIC: &[u8; 4] = b"BOVF";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut out: W, field: &Field, t: f64) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.points() as u64).to_le_bytes())?;
    out.write_all(&grid.length().to_le_bytes())?;
    out.write_all(&t.to_le_bytes())?;
    for v in field.samples() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a snapshot. Reuses `grid` when its parameters match the file.
pub fn read_snapshot<R: Read>(mut input: R, grid: Option<&Arc<Grid>>) -> Result<(Field, f64)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let length = f64::from_le_bytes(read_array(&mut input)?);
    let t = f64::from_le_bytes(read_array(&mut input)?);
    let grid = match grid {
        Some(g) if g.points() == n && g.length() == length => Arc::clone(g),
        _ => Grid::new(length, n)?,
    };
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push(f64::from_le_bytes(read_array(&mut input)?));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    Ok((Field::from_samples(&grid, samples)?, t))
}

fn read_array<R: Read, const N: usize>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format("truncated snapshot".into())
        } else {
            Error::Io(e)
        }
    })?;
    Ok(buf)
}

pub fn save(path: &Path, field: &Field, t: f64) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), field, t)
}

pub fn load(path: &Path, grid: Option<&Arc<Grid>>) -> Result<(Field, f64)> {
    read_snapshot(BufReader::new(File::open(path)?), grid)
}
