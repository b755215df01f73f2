//! Bit-exact density-matrix snapshots.
//!
//! Layout (little-endian): 32-byte header — 8-byte magic `COVLSNAP`,
//! u32 format version, u32 n_points, u32 representation tag
//! (0 = position, 1 = momentum), 12 reserved zero bytes — followed by the
//! row-major entries as interleaved real/imaginary 8-byte floats.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::io::{Read, Write};
use std::path::Path;

use covlin_core::{DensityMatrix, Representation};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"COVLSNAP";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

fn rep_tag(rep: Representation) -> u32 {
    match rep {
        Representation::Position => 0,
        Representation::Momentum => 1,
    }
}

pub fn emit_snapshot(rho: &DensityMatrix, path: &Path) -> Result<()> {
    let n = rho.dim();
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(MAGIC);
    header[8..12].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    header[12..16].copy_from_slice(&(n as u32).to_le_bytes());
    header[16..20].copy_from_slice(&rep_tag(rho.representation()).to_le_bytes());

    let mut body = Vec::with_capacity(n * n * 16);
    for z in rho.entries().iter() {
        body.extend_from_slice(&z.re.to_le_bytes());
        body.extend_from_slice(&z.im.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&header)?;
    file.write_all(&body)?;
    Ok(())
}

fn format_err(path: &Path, offset: usize, what: &str) -> CliError {
    CliError::Io(format!(
        "{}: snapshot format error at byte {offset}: {what}",
        path.display()
    ))
}

pub fn load_snapshot(path: &Path) -> Result<DensityMatrix> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(format_err(path, bytes.len(), "truncated header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(format_err(path, 0, "bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(format_err(path, 8, "unsupported format version"));
    }
    let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let rep = match u32::from_le_bytes(bytes[16..20].try_into().unwrap()) {
        0 => Representation::Position,
        1 => Representation::Momentum,
        _ => return Err(format_err(path, 16, "unknown representation tag")),
    };
    if bytes[20..HEADER_LEN].iter().any(|&b| b != 0) {
        return Err(format_err(path, 20, "nonzero reserved bytes"));
    }
    let expected = HEADER_LEN + n * n * 16;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            bytes.len().min(expected),
            "body size mismatch",
        ));
    }
    let mut entries = Array2::<C64>::zeros((n, n));
    for (i, slot) in entries.iter_mut().enumerate() {
        let off = HEADER_LEN + i * 16;
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        *slot = C64::new(re, im);
    }
    Ok(DensityMatrix::new(entries, rep)?)
}
