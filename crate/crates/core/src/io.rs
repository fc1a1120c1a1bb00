//! File formats: the columnar binary sample format, the row-map sidecar of
//! expanded streams, sign grids and configuration documents.
//!
//! Binary layout, little-endian throughout:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4 | magic `MWC1` |
//! | 4 | flags, bit 0 set for complex samples |
//! | 8 | channel count `m` (u64) |
//! | 8 | samples per channel (u64) |
//! | 8 | sample rate in Hz (f64) |
//! | 8 | absolute index of the first sample (i64) |
//!
//! followed by the samples of channel 0, then channel 1 and so on. Complex
//! samples are stored as interleaved `re, im` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expander::VirtualRow;
use crate::frontend::{MwcConfig, SampleStream, SignMatrix};
use crate::linalg::CMatrix;

pub const MAGIC: &[u8; 4] = b"MWC1";
const FLAG_COMPLEX: u32 = 1;

pub fn write_stream<W: Write>(stream: &SampleStream, out: W) -> Result<()> {
    write_columnar(&stream.data, stream.rate, stream.first_index, out)
}

pub fn read_stream<R: Read>(input: R) -> Result<SampleStream> {
    let (data, rate, first_index) = read_columnar(input)?;
    Ok(SampleStream { data, rate, first_index })
}

pub fn save_stream(stream: &SampleStream, path: &Path) -> Result<()> {
    write_stream(stream, BufWriter::new(File::create(path)?))
}

pub fn load_stream(path: &Path) -> Result<SampleStream> {
    read_stream(BufReader::new(File::open(path)?))
}

/// Writes a matrix in the sample format, one row per channel, with rate 0.
pub fn save_matrix(matrix: &CMatrix, path: &Path) -> Result<()> {
    write_columnar(matrix, 0.0, 0, BufWriter::new(File::create(path)?))
}

pub fn load_matrix(path: &Path) -> Result<CMatrix> {
    Ok(read_columnar(BufReader::new(File::open(path)?))?.0)
}

fn write_columnar<W: Write>(data: &CMatrix, rate: f64, first_index: i64, mut out: W) -> Result<()> {
    let complex = data.iter().any(|v| v.im != 0.0);
    out.write_all(MAGIC)?;
    out.write_all(&(if complex { FLAG_COMPLEX } else { 0 }).to_le_bytes())?;
    out.write_all(&(data.nrows() as u64).to_le_bytes())?;
    out.write_all(&(data.ncols() as u64).to_le_bytes())?;
    out.write_all(&rate.to_le_bytes())?;
    out.write_all(&first_index.to_le_bytes())?;
    for i in 0..data.nrows() {
        for v in data.row(i).iter() {
            out.write_all(&v.re.to_le_bytes())?;
            if complex {
                out.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn read_columnar<R: Read>(mut input: R) -> Result<(CMatrix, f64, i64)> {
    let mut header = [0u8; 40];
    input.read_exact(&mut header).map_err(|_| Error::Parse("sample file header is truncated".into()))?;
    if &header[..4] != MAGIC {
        return Err(Error::Parse("not a sample file: bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().expect("8 bytes"));
    let flags = u32_at(4);
    if flags & !FLAG_COMPLEX != 0 {
        return Err(Error::Parse(format!("unknown flags {flags:#x}")));
    }
    let complex = flags & FLAG_COMPLEX != 0;
    let (rows, cols) = (u64_at(8) as usize, u64_at(16) as usize);
    let rate = f64::from_bits(u64_at(24));
    let first_index = u64_at(32) as i64;
    let per_value = if complex { 16 } else { 8 };
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(per_value))
        .ok_or_else(|| Error::Parse("sample file dimensions overflow".into()))?;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != expected {
        return Err(Error::Parse(format!("expected {expected} bytes of samples, found {}", body.len())));
    }
    let f64_at = |o: usize| f64::from_le_bytes(body[o..o + 8].try_into().expect("8 bytes"));
    let data = CMatrix::from_fn(rows, cols, |i, n| {
        let o = (i * cols + n) * per_value;
        Complex64::new(f64_at(o), if complex { f64_at(o + 8) } else { 0.0 })
    });
    Ok((data, rate, first_index))
}

/// Sidecar describing which physical channel and shift each row of an
/// expanded stream comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMap {
    pub rate_ratio: usize,
    pub rows: Vec<VirtualRow>,
}

pub fn save_row_map(map: &RowMap, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(map)?)?;
    Ok(())
}

pub fn load_row_map(path: &Path) -> Result<RowMap> {
    serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Parse(format!("row map: {e}")))
}

pub fn save_signs(signs: &SignMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, signs.to_text())?;
    Ok(())
}

pub fn load_signs(path: &Path) -> Result<SignMatrix> {
    SignMatrix::from_text(&std::fs::read_to_string(path)?)
}

pub fn save_config(config: &MwcConfig, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(config)?)?;
    Ok(())
}

pub fn load_config(path: &Path) -> Result<MwcConfig> {
    let config: MwcConfig =
        serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Parse(format!("config: {e}")))?;
    config.validate()?;
    Ok(config)
}
