//! Binary container for per-bin demixing matrices.
//!
//! Layout, all little-endian:
//!   magic   4 bytes  "TDMX"
//!   version u32      currently 1
//!   bins    u32
//!   rows    u32
//!   cols    u32
//!   data    bins * rows * cols complex entries, each (re: f64, im: f64)
//!
//! Matrices are stored row-major, bins in order. Values are written as f64
//! regardless of the in-memory scalar, so states are portable across widths.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{Cx, Scalar};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: [u8; 4] = *b"TDMX";
const VERSION: u32 = 1;

pub fn write_demix<T: Scalar, W: Write>(w: &mut W, demix: &[CMat<T>]) -> Result<()> {
    let (rows, cols) = match demix.first() {
        Some(m) => (m.rows(), m.cols()),
        None => (0, 0),
    };
    if demix.iter().any(|m| m.rows() != rows || m.cols() != cols) {
        return Err(Error::Dimension(
            "demixing matrices differ in shape; cannot serialize".into(),
        ));
    }
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(demix.len() as u32).to_le_bytes())?;
    w.write_all(&(rows as u32).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    for m in demix {
        for v in m.data() {
            w.write_all(&v.re.to_f64().to_le_bytes())?;
            w.write_all(&v.im.to_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_demix<T: Scalar, R: Read>(r: &mut R) -> Result<Vec<CMat<T>>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::Config(
            "not a demixing state file (bad magic)".into(),
        ));
    }
    let mut word = [0u8; 4];
    let mut read_u32 = |r: &mut R| -> Result<u32> {
        r.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word))
    };
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Config(format!(
            "unsupported demixing state version {version}"
        )));
    }
    let bins = read_u32(r)? as usize;
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    if rows.saturating_mul(cols) > 1 << 20 || bins > 1 << 24 {
        return Err(Error::Config(
            "demixing state header describes an implausible size".into(),
        ));
    }
    let mut out = Vec::with_capacity(bins);
    let mut buf = [0u8; 16];
    for _ in 0..bins {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                r.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
                let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
                *m.at_mut(i, j) = Cx::new(T::of(re), T::of(im));
            }
        }
        out.push(m);
    }
    Ok(out)
}

pub fn write_demix_file<T: Scalar>(path: &Path, demix: &[CMat<T>]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_demix(&mut f, demix)?;
    use std::io::Write as _;
    f.flush()?;
    Ok(())
}

pub fn read_demix_file<T: Scalar>(path: &Path) -> Result<Vec<CMat<T>>> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_demix(&mut f)
}
