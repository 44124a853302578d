//! `BOONMODL` v1 checkpoints.
//!
//! Layout (little-endian): the 8 ASCII bytes `BOONMODL`, `u32` version, then
//! the architecture as `u32` layers, modes, width, out channels, wiring kind
//! (0 Dirichlet, 1 Neumann, 2 periodic), side (0 left, 1 right, 2 both),
//! stencil order, mollifier flag, corrected flag, training resolution (0 when
//! unknown), and `f64` periodic weights
//! alpha and beta. Then `u64` parameter count and the `f64` parameters, then
//! the Adam step as `u64` and the first and second moments.

use std::path::Path;

use thiserror::Error;

use crate::boundary::Side;

use super::adam::AdamState;
use super::params::{Arch, OperatorParams, Wiring};

pub const MAGIC: &[u8; 8] = b"BOONMODL";
pub const VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("not a BOONMODL file (bad magic)")]
    BadMagic,
    #[error("unsupported BOONMODL version {0} (expected {VERSION})")]
    BadVersion(u32),
    #[error("checkpoint truncated")]
    Truncated,
    #[error("bad checkpoint header: {0}")]
    Header(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: OperatorParams,
    /// Grid points of the training data.
    pub resolution: usize,
    pub adam: AdamState,
}

pub fn to_bytes(c: &Checkpoint) -> Vec<u8> {
    let a = &c.params.arch;
    let mut out = Vec::with_capacity(96 + 24 * c.params.values.len());
    out.extend_from_slice(MAGIC);
    let (kind, side, order, alpha, beta) = match a.wiring {
        Wiring::Dirichlet { side } => (0, side, 0, 0.0, 0.0),
        Wiring::Neumann { side, order } => (1, side, order, 0.0, 0.0),
        Wiring::Periodic { alpha, beta } => (2, Side::Both, 0, alpha, beta),
    };
    let side = match side {
        Side::Left => 0,
        Side::Right => 1,
        Side::Both => 2,
    };
    let words = [
        VERSION,
        a.layers as u32,
        a.modes as u32,
        a.width as u32,
        a.out_channels as u32,
        kind,
        side,
        order as u32,
        a.mollifier as u32,
        a.corrected as u32,
        c.resolution as u32,
    ];
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&alpha.to_le_bytes());
    out.extend_from_slice(&beta.to_le_bytes());
    out.extend_from_slice(&(c.params.values.len() as u64).to_le_bytes());
    let floats = |out: &mut Vec<u8>, v: &[f64]| v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    floats(&mut out, &c.params.values);
    out.extend_from_slice(&c.adam.step.to_le_bytes());
    floats(&mut out, &c.adam.m);
    floats(&mut out, &c.adam.v);
    out
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8], CheckpointError> {
        let s = self.b.get(self.pos..self.pos + k).ok_or(CheckpointError::Truncated)?;
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        let bytes = n.checked_mul(8).ok_or(CheckpointError::Truncated)?;
        Ok(self.take(bytes)?.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn from_bytes(b: &[u8]) -> Result<Checkpoint, CheckpointError> {
    if b.len() < 8 || &b[..8] != MAGIC {
        return Err(if MAGIC.starts_with(b) { CheckpointError::Truncated } else { CheckpointError::BadMagic });
    }
    let mut r = Reader { b, pos: 8 };
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let mut w = [0u32; 10];
    for v in &mut w {
        *v = r.u32()?;
    }
    let alpha = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let beta = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let side = match w[5] {
        0 => Side::Left,
        1 => Side::Right,
        2 => Side::Both,
        s => return Err(CheckpointError::Header(format!("side code {s}"))),
    };
    let wiring = match w[4] {
        0 => Wiring::Dirichlet { side },
        1 => Wiring::Neumann { side, order: w[6] as usize },
        2 => Wiring::Periodic { alpha, beta },
        k => return Err(CheckpointError::Header(format!("wiring code {k}"))),
    };
    let flag = |v: u32| match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(CheckpointError::Header(format!("flag {v}"))),
    };
    let arch = Arch {
        layers: w[0] as usize,
        modes: w[1] as usize,
        width: w[2] as usize,
        out_channels: w[3] as usize,
        mollifier: flag(w[7])?,
        corrected: flag(w[8])?,
        wiring,
    };
    arch.validate().map_err(|e| CheckpointError::Header(e.to_string()))?;
    let count = r.u64()? as usize;
    if count != arch.param_count() {
        return Err(CheckpointError::Header(format!(
            "{count} parameters stored, architecture needs {}",
            arch.param_count()
        )));
    }
    let values = r.floats(count)?;
    let step = r.u64()?;
    let m = r.floats(count)?;
    let v = r.floats(count)?;
    if r.pos != b.len() {
        return Err(CheckpointError::Header(format!("{} trailing bytes", b.len() - r.pos)));
    }
    let params = OperatorParams::from_values(arch, values).map_err(|e| CheckpointError::Header(e.to_string()))?;
    Ok(Checkpoint { params, resolution: w[9] as usize, adam: AdamState { step, m, v } })
}

pub fn write_checkpoint(path: &Path, c: &Checkpoint) -> Result<(), CheckpointError> {
    std::fs::write(path, to_bytes(c)).map_err(|e| CheckpointError::Io(format!("{}: {e}", path.display())))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let b = std::fs::read(path).map_err(|e| CheckpointError::Io(format!("{}: {e}", path.display())))?;
    from_bytes(&b)
}
