//! Binary formats for spectral fields and solver states.
//!
//! Field layout (all integers and floats little-endian):
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 8    | magic `IPMFIELD`                          |
//! | 8      | 4    | format version, `1`                       |
//! | 12     | 1    | dimension (2 or 3)                        |
//! | 13     | 1    | normalisation tag, `1` (see below)        |
//! | 14     | 1    | endianness tag, `1` = little-endian       |
//! | 15     | 1    | reserved, `0`                             |
//! | 16     | 8    | points per axis `N`                       |
//! | 24     | 16·N^d | coefficients `(re, im)` as `f64` pairs  |
//!
//! Coefficients are in row-major FFT order (last axis fastest, index `j`
//! holding wavenumber `j` for `j < N/2` and `j - N` otherwise). Normalisation
//! tag 1 means `f(x) = Σ_k f̂(k) e^{ik·x}` on `[-π, π)^d`.
//!
//! A solver state is the magic `IPMSTATE`, version `u32`, step `u64`, time
//! `f64`, followed by an embedded field.

use std::io::{Read, Write};
use std::path::Path;

use ipm_core::solver::SimState;
use ipm_core::{Complex64, Grid, SpectralField};

use crate::error::LabError;

pub const FIELD_MAGIC: &[u8; 8] = b"IPMFIELD";
pub const STATE_MAGIC: &[u8; 8] = b"IPMSTATE";
pub const VERSION: u32 = 1;
pub const NORMALISATION_TAG: u8 = 1;
pub const LITTLE_ENDIAN_TAG: u8 = 1;

pub fn encode_field(field: &SpectralField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(24 + 16 * g.len());
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&[g.dim() as u8, NORMALISATION_TAG, LITTLE_ENDIAN_TAG, 0]);
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    for c in field.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LabError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            LabError::Format(format!("truncated checkpoint: need {n} bytes at offset {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, LabError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, LabError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, LabError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode_field_from(c: &mut Cursor<'_>) -> Result<SpectralField, LabError> {
    if c.take(8)? != FIELD_MAGIC {
        return Err(LabError::Format("not a field checkpoint (bad magic)".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(LabError::Format(format!("unsupported field version {version}")));
    }
    let tags = c.take(4)?;
    let (dim, norm, endian) = (tags[0] as usize, tags[1], tags[2]);
    if norm != NORMALISATION_TAG {
        return Err(LabError::Format(format!("unknown normalisation tag {norm}")));
    }
    if endian != LITTLE_ENDIAN_TAG {
        return Err(LabError::Format(format!("unsupported endianness tag {endian}")));
    }
    let n = usize::try_from(c.u64()?).map_err(|_| LabError::Format("grid size overflows".into()))?;
    let grid = Grid::new(dim, n).map_err(|e| LabError::Format(format!("invalid grid in checkpoint: {e}")))?;
    let mut coeffs = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = c.f64()?;
        let im = c.f64()?;
        coeffs.push(Complex64::new(re, im));
    }
    SpectralField::from_coeffs(grid, coeffs).map_err(|e| LabError::Format(e.to_string()))
}

pub fn decode_field(bytes: &[u8]) -> Result<SpectralField, LabError> {
    let mut c = Cursor { bytes, pos: 0 };
    let f = decode_field_from(&mut c)?;
    if c.pos != bytes.len() {
        return Err(LabError::Format(format!("{} trailing bytes after field", bytes.len() - c.pos)));
    }
    Ok(f)
}

pub fn encode_state(state: &SimState) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(STATE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&state.step.to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&encode_field(state.rho()));
    out
}

pub fn decode_state(bytes: &[u8]) -> Result<SimState, LabError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != STATE_MAGIC {
        return Err(LabError::Format("not a solver checkpoint (bad magic)".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(LabError::Format(format!("unsupported state version {version}")));
    }
    let step = c.u64()?;
    let t = c.f64()?;
    let rho = decode_field(&bytes[c.pos..])?;
    Ok(SimState::new(t, step, rho))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let mut f = std::fs::File::create(path).map_err(|e| LabError::io(path, e))?;
    f.write_all(bytes).map_err(|e| LabError::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, LabError> {
    let mut f = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| LabError::io(path, e))?;
    Ok(buf)
}

pub fn save_state(path: &Path, state: &SimState) -> Result<(), LabError> {
    write_bytes(path, &encode_state(state))
}

pub fn load_state(path: &Path) -> Result<SimState, LabError> {
    decode_state(&read_bytes(path)?)
}
