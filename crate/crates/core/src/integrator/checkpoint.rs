//! Binary state dump: an 8-byte magic, a version, the grid and parameters,
//! then the density and velocity coefficients as little-endian `f64` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{NspError, Result};
use crate::model::{NspState, PhysParams, PressureLaw};
use crate::spectral::{Grid, SpectralField};

const MAGIC: &[u8; 8] = b"NSPCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, state: &NspState, params: &PhysParams) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = state.grid();
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    let (law, gamma) = match params.pressure {
        PressureLaw::Linear => (0u8, 1.0),
        PressureLaw::Gamma(g) => (1u8, g),
    };
    for v in [grid.length(), state.time(), params.mu, params.lambda] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&[law])?;
    w.write_all(&gamma.to_le_bytes())?;
    for comp in state.rho().components().iter().chain(state.velocity().components()) {
        for z in comp {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| NspError::Checkpoint(format!("truncated file: {e}")))?;
    Ok(b)
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

pub fn read_checkpoint(path: &Path) -> Result<(NspState, PhysParams)> {
    let mut r = BufReader::new(File::open(path)?);
    if &read_array::<8>(&mut r)? != MAGIC {
        return Err(NspError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != CHECKPOINT_VERSION {
        return Err(NspError::Checkpoint(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let length = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let mu = read_f64(&mut r)?;
    let lambda = read_f64(&mut r)?;
    let law = read_array::<1>(&mut r)?[0];
    let gamma = read_f64(&mut r)?;
    let pressure = match law {
        0 => PressureLaw::Linear,
        1 => PressureLaw::Gamma(gamma),
        other => return Err(NspError::Checkpoint(format!("unknown pressure law tag {other}"))),
    };
    let params = PhysParams::new(mu, lambda, pressure)?;
    let grid = Grid::new(n, length)?;
    let mut comps = Vec::with_capacity(4);
    for _ in 0..4 {
        let mut c = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            c.push(Complex64::new(re, im));
        }
        comps.push(c);
    }
    let u = comps.split_off(1);
    let state = NspState::new(
        SpectralField::from_components(grid, comps)?,
        SpectralField::from_components(grid, u)?,
        time,
    )?;
    Ok((state, params))
}
