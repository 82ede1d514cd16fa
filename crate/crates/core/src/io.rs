//! Binary state files.
//!
//! `RHO1`: magic, version byte 1, `u32` n, then the `4^n` entries of the dense
//! matrix row-major as little-endian `f64` pairs `(re, im)`.
//!
//! `MPO1`: magic, version byte 1, `u32` n, `u32` bonds `D₀..Dₙ`, then each core's
//! entries in `(left, i, j, right)` lexicographic order, same number encoding.

use std::path::Path;

use crate::error::{PcsError, Result};
use crate::numerics::{ComplexMatrix, Complex64, TOLERANCES};
use crate::states::MpoState;

const RHO_MAGIC: &[u8; 4] = b"RHO1";
const MPO_MAGIC: &[u8; 4] = b"MPO1";
const VERSION: u8 = 1;
/// Refuse absurd bond dimensions before allocating.
const MAX_BOND: usize = 1 << 16;

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail(&self, reason: impl Into<String>) -> PcsError {
        PcsError::Format {
            path: self.path.to_path_buf(),
            reason: reason.into(),
        }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| self.fail(format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.take(4)? != magic {
            return Err(self.fail(format!(
                "bad magic, expected {}",
                String::from_utf8_lossy(magic)
            )));
        }
        let v = self.take(1)?[0];
        if v != VERSION {
            return Err(self.fail(format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    }

    fn complex(&mut self) -> Result<Complex64> {
        let b = self.take(16)?;
        let re = f64::from_le_bytes(b[..8].try_into().unwrap());
        let im = f64::from_le_bytes(b[8..].try_into().unwrap());
        if !re.is_finite() || !im.is_finite() {
            return Err(self.fail("non-finite entry"));
        }
        Ok(Complex64::new(re, im))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.fail(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| PcsError::io(path, e))
}

fn put_complex(buf: &mut Vec<u8>, z: Complex64) {
    buf.extend_from_slice(&z.re.to_le_bytes());
    buf.extend_from_slice(&z.im.to_le_bytes());
}

fn put_u32(buf: &mut Vec<u8>, path: &Path, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| PcsError::Format {
        path: path.to_path_buf(),
        reason: format!("{v} does not fit in u32"),
    })?;
    buf.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn write_all(path: &Path, buf: &[u8]) -> Result<()> {
    std::fs::write(path, buf).map_err(|e| PcsError::io(path, e))
}

/// Writes any `2^n × 2^n` matrix (estimates need not be physical).
pub fn write_rho(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let d = m.nrows();
    if !m.is_square() || !d.is_power_of_two() {
        return Err(PcsError::invalid(format!(
            "RHO1 needs a 2^n x 2^n matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut buf = Vec::with_capacity(9 + 16 * d * d);
    buf.extend_from_slice(RHO_MAGIC);
    buf.push(VERSION);
    put_u32(&mut buf, path, d.trailing_zeros() as usize)?;
    for i in 0..d {
        for j in 0..d {
            put_complex(&mut buf, m[(i, j)]);
        }
    }
    write_all(path, &buf)
}

pub fn read_rho(path: &Path) -> Result<ComplexMatrix> {
    let bytes = read_all(path)?;
    let mut r = Reader { path, bytes: &bytes, pos: 0 };
    r.header(RHO_MAGIC)?;
    let n = r.u32()?;
    if n > TOLERANCES.dense_qubit_limit {
        return Err(r.fail(format!(
            "{n} qubits exceeds the dense limit {}",
            TOLERANCES.dense_qubit_limit
        )));
    }
    let d = 1usize << n;
    let expected = 9 + 16 * d * d;
    if bytes.len() != expected {
        return Err(r.fail(format!("{} bytes, expected {expected} for n = {n}", bytes.len())));
    }
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = r.complex()?;
        }
    }
    r.finish()?;
    Ok(m)
}

pub fn write_mpo(path: &Path, mpo: &MpoState) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MPO_MAGIC);
    buf.push(VERSION);
    put_u32(&mut buf, path, mpo.n_qubits())?;
    for &b in mpo.all_bonds() {
        put_u32(&mut buf, path, b)?;
    }
    for l in 0..mpo.n_qubits() {
        for z in mpo.lexicographic(l) {
            put_complex(&mut buf, z);
        }
    }
    write_all(path, &buf)
}

pub fn read_mpo(path: &Path) -> Result<MpoState> {
    let bytes = read_all(path)?;
    let mut r = Reader { path, bytes: &bytes, pos: 0 };
    r.header(MPO_MAGIC)?;
    let n = r.u32()?;
    if n == 0 || n > 4096 {
        return Err(r.fail(format!("implausible qubit count {n}")));
    }
    let bonds = (0..=n).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    if bonds.iter().any(|&b| b == 0 || b > MAX_BOND) {
        return Err(r.fail(format!("bond dimensions out of range: {bonds:?}")));
    }
    let payload: usize = bonds.windows(2).map(|w| w[0] * 4 * w[1] * 16).sum();
    if bytes.len() - r.pos != payload {
        return Err(r.fail(format!(
            "{} payload bytes, bonds {bonds:?} need {payload}",
            bytes.len() - r.pos
        )));
    }
    let entries = bonds
        .windows(2)
        .map(|w| (0..w[0] * 4 * w[1]).map(|_| r.complex()).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    r.finish()?;
    MpoState::from_lexicographic(&bonds, &entries).map_err(|e| r.fail(e.to_string()))
}
