//! `BOONDATA` v1 files.
//!
//! Layout (little-endian): the 8 ASCII bytes `BOONDATA`, `u32` version, `u32`
//! problem tag, `u32` dims, one `u32` size per dim, `u32` sample count `n`,
//! `u32` `M`; then `n x points` f64 inputs, `n x M x points` f64 outputs; then
//! a `u32` byte length and that many bytes of UTF-8 JSON metadata.

use std::path::Path;

use thiserror::Error;

use super::dataset::{Dataset, DatasetMeta};
use super::Problem;

pub const MAGIC: &[u8; 8] = b"BOONDATA";
pub const VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("not a BOONDATA file (bad magic)")]
    BadMagic,
    #[error("unsupported BOONDATA version {0} (expected {VERSION})")]
    BadVersion(u32),
    #[error("unknown problem tag {0}")]
    UnknownProblem(u32),
    #[error("file truncated: {0}")]
    Truncated(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad metadata: {0}")]
    Metadata(String),
}

pub fn to_bytes(d: &Dataset) -> Vec<u8> {
    let meta = serde_json::to_string(&d.meta).expect("metadata serializes");
    let mut out = Vec::with_capacity(64 + 8 * (d.inputs.len() + d.outputs.len()) + meta.len());
    out.extend_from_slice(MAGIC);
    let put = |v: u32, out: &mut Vec<u8>| out.extend_from_slice(&v.to_le_bytes());
    put(VERSION, &mut out);
    put(d.meta.spec.problem.tag(), &mut out);
    put(d.meta.shape.len() as u32, &mut out);
    for &s in &d.meta.shape {
        put(s as u32, &mut out);
    }
    put(d.meta.n as u32, &mut out);
    put(d.meta.m as u32, &mut out);
    for v in d.inputs.iter().chain(&d.outputs) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    put(meta.len() as u32, &mut out);
    out.extend_from_slice(meta.as_bytes());
    out
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn u32(&mut self, what: &str) -> Result<u32, FormatError> {
        let s = self
            .b
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| FormatError::Truncated(format!("header ends before {what}")))?;
        self.pos += 4;
        Ok(u32::from_le_bytes(s.try_into().unwrap()))
    }
}

/// Looks for a plausible trailer: a `u32` equal to the bytes that follow it,
/// followed by a `{`.
fn find_trailer(b: &[u8], from: usize) -> Option<usize> {
    (from..b.len().saturating_sub(4)).find(|&q| {
        let len = u32::from_le_bytes(b[q..q + 4].try_into().unwrap()) as usize;
        len > 0 && q + 4 + len == b.len() && b[q + 4] == b'{'
    })
}

pub fn from_bytes(b: &[u8]) -> Result<Dataset, FormatError> {
    if b.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(b) {
            FormatError::Truncated("shorter than the magic".into())
        } else {
            FormatError::BadMagic
        });
    }
    if &b[..8] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let mut r = Reader { b, pos: 8 };
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(FormatError::BadVersion(version));
    }
    let tag = r.u32("problem tag")?;
    let problem = Problem::from_tag(tag).ok_or(FormatError::UnknownProblem(tag))?;
    let dims = r.u32("dims")? as usize;
    if !(1..=2).contains(&dims) {
        return Err(FormatError::Shape(format!("{dims} dimensions")));
    }
    let shape: Vec<usize> = (0..dims).map(|_| r.u32("sizes").map(|v| v as usize)).collect::<Result<_, _>>()?;
    let n = r.u32("sample count")? as usize;
    let m = r.u32("M")? as usize;
    let points: usize = shape.iter().product();
    let values = (n as u128) * (points as u128) * (1 + m as u128);
    let header = r.pos;
    let trailer = header as u128 + 8 * values;
    let expected_end = usize::try_from(trailer).ok().filter(|&t| t + 4 <= b.len()).and_then(|t| {
        let len = u32::from_le_bytes(b[t..t + 4].try_into().unwrap()) as usize;
        (t + 4 + len == b.len()).then_some(t)
    });
    let Some(t) = expected_end else {
        return Err(match find_trailer(b, header) {
            Some(q) => FormatError::Shape(format!(
                "header implies {values} values but the payload holds {}",
                (q - header) / 8
            )),
            None => FormatError::Truncated(format!("expected at least {} bytes, got {}", trailer + 4, b.len())),
        });
    };
    let floats = |lo: usize, hi: usize| -> Vec<f64> {
        b[lo..hi].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
    };
    let split = header + 8 * n * points;
    let inputs = floats(header, split);
    let outputs = floats(split, t);
    let text = std::str::from_utf8(&b[t + 4..]).map_err(|e| FormatError::Metadata(e.to_string()))?;
    let meta: DatasetMeta = serde_json::from_str(text).map_err(|e| FormatError::Metadata(e.to_string()))?;
    if meta.shape != shape || meta.n != n || meta.m != m || meta.spec.problem != problem {
        return Err(FormatError::Shape(format!(
            "header says {problem:?} {shape:?} n={n} M={m}, metadata says {:?} {:?} n={} M={}",
            meta.spec.problem, meta.shape, meta.n, meta.m
        )));
    }
    Ok(Dataset { meta, inputs, outputs })
}

pub fn write_dataset(path: &Path, d: &Dataset) -> Result<(), FormatError> {
    std::fs::write(path, to_bytes(d)).map_err(|e| FormatError::Io(format!("{}: {e}", path.display())))
}

pub fn read_dataset(path: &Path) -> Result<Dataset, FormatError> {
    let b = std::fs::read(path).map_err(|e| FormatError::Io(format!("{}: {e}", path.display())))?;
    from_bytes(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{build_dataset, ProblemSpec};

    fn data() -> Dataset {
        build_dataset(&ProblemSpec::standard(Problem::StokesSecond, 16, false).with_size(5)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let d = data();
        let back = from_bytes(&to_bytes(&d)).unwrap();
        assert_eq!(back, d);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.boondata");
        write_dataset(&p, &d).unwrap();
        assert_eq!(read_dataset(&p).unwrap(), d);
    }

    #[test]
    fn distinct_errors() {
        let b = to_bytes(&data());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert_eq!(from_bytes(&bad), Err(FormatError::BadMagic));
        let mut bad = b.clone();
        bad[8] = 2;
        assert_eq!(from_bytes(&bad), Err(FormatError::BadVersion(2)));
        assert!(matches!(from_bytes(&b[..b.len() - 10]), Err(FormatError::Truncated(_))));
        assert!(matches!(from_bytes(&b[..30]), Err(FormatError::Truncated(_))));
        // Header claims one more sample than the payload holds.
        let mut bad = b.clone();
        let n_at = 8 + 4 * 3 + 4;
        bad[n_at..n_at + 4].copy_from_slice(&6u32.to_le_bytes());
        assert!(matches!(from_bytes(&bad), Err(FormatError::Shape(_))));
        // Header shrunk instead.
        let mut bad = b;
        bad[n_at..n_at + 4].copy_from_slice(&4u32.to_le_bytes());
        assert!(matches!(from_bytes(&bad), Err(FormatError::Shape(_))));
    }
}
