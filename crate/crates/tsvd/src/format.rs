//! Binary containers for dense matrices (`.fmat`) and factorizations (`.tsvd`).
//!
//! Both are little-endian. `.fmat` is a 16-byte header followed by row-major
//! `f32` values. `.tsvd` is a magic, version and JSON header length, the JSON
//! header, `k` singular values as `f32`, then the packed `U` and `V` payloads
//! (two bits per entry, rows padded to whole bytes).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tsvd_core::{ConvSpec, DenseMatrix, FormType, TernaryMatrix, TsvdError, TsvdFactorization};

pub const FMAT_MAGIC: &[u8; 4] = b"FMAT";
pub const TSVD_MAGIC: &[u8; 4] = b"TSVD";
pub const FORMAT_VERSION: u16 = 1;
const FMAT_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic at byte 0: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported version {version} at byte {offset}")]
    UnsupportedVersion { offset: usize, version: u16 },
    #[error("unsupported dtype {dtype} at byte {offset}")]
    UnsupportedDtype { offset: usize, dtype: u8 },
    #[error("unsupported flags {flags:#04x} at byte {offset}")]
    UnsupportedFlags { offset: usize, flags: u8 },
    #[error("truncated input: {what} needs bytes {offset}..{end}, file has {len}")]
    Truncated {
        what: &'static str,
        offset: usize,
        end: usize,
        len: usize,
    },
    #[error("{count} trailing bytes after offset {offset}")]
    TrailingBytes { offset: usize, count: usize },
    #[error("non-finite value at byte {offset}")]
    NonFinite { offset: usize },
    #[error("invalid JSON header at byte {offset}: {message}")]
    Header { offset: usize, message: String },
    #[error("invalid {what} payload at byte {offset}: {source}")]
    Payload {
        what: &'static str,
        offset: usize,
        source: TsvdError,
    },
    #[error("matrix too large for the format: {0}")]
    TooLarge(&'static str),
}

pub type Result<T> = std::result::Result<T, FormatError>;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, len: usize, what: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).ok_or(FormatError::Truncated {
            what,
            offset: self.pos,
            end: usize::MAX,
            len: self.bytes.len(),
        })?;
        if end > self.bytes.len() {
            return Err(FormatError::Truncated {
                what,
                offset: self.pos,
                end,
                len: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let found = self.take(4, "magic")?;
        if found != expected {
            return Err(FormatError::BadMagic {
                expected: String::from_utf8_lossy(expected).into_owned(),
                found: String::from_utf8_lossy(found).into_owned(),
            });
        }
        Ok(())
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        Ok(u16::from_le_bytes(
            self.take(2, what)?.try_into().expect("two bytes"),
        ))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("four bytes"),
        ))
    }

    fn version(&mut self) -> Result<()> {
        let offset = self.pos;
        let version = self.u16("version")?;
        if version != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion { offset, version });
        }
        Ok(())
    }

    fn f32s(&mut self, count: usize, what: &'static str) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(4)
            .ok_or(FormatError::TooLarge("value count overflows"))?;
        let start = self.pos;
        let raw = self.take(len, what)?;
        raw.chunks_exact(4)
            .enumerate()
            .map(|(i, c)| {
                let v = f32::from_le_bytes(c.try_into().expect("four bytes"));
                if v.is_finite() {
                    Ok(f64::from(v))
                } else {
                    Err(FormatError::NonFinite {
                        offset: start + 4 * i,
                    })
                }
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(FormatError::TrailingBytes {
                offset: self.pos,
                count: self.bytes.len() - self.pos,
            });
        }
        Ok(())
    }
}

fn dim(value: usize, what: &'static str) -> Result<u32> {
    u32::try_from(value).map_err(|_| FormatError::TooLarge(what))
}

/// Encodes a matrix as `.fmat`; values are rounded to `f32`.
pub fn encode_fmat(m: &DenseMatrix) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(FMAT_HEADER_LEN + 4 * m.as_slice().len());
    out.extend_from_slice(FMAT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(0); // dtype: f32
    out.push(0); // flags
    out.extend_from_slice(&dim(m.rows(), "rows")?.to_le_bytes());
    out.extend_from_slice(&dim(m.cols(), "cols")?.to_le_bytes());
    for &v in m.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_fmat(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut r = Reader::new(bytes);
    r.magic(FMAT_MAGIC)?;
    r.version()?;
    let offset = r.pos;
    let dtype = r.u8("dtype")?;
    if dtype != 0 {
        return Err(FormatError::UnsupportedDtype { offset, dtype });
    }
    let offset = r.pos;
    let flags = r.u8("flags")?;
    if flags != 0 {
        return Err(FormatError::UnsupportedFlags { offset, flags });
    }
    let rows = r.u32("rows")? as usize;
    let cols = r.u32("cols")? as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or(FormatError::TooLarge("rows * cols overflows"))?;
    let values = r.f32s(count, "matrix values")?;
    r.finish()?;
    Ok(DenseMatrix::new(rows, cols, values).expect("length and finiteness checked"))
}

pub fn read_fmat(path: &Path) -> Result<DenseMatrix> {
    decode_fmat(&fs::read(path)?)
}

pub fn write_fmat(path: &Path, m: &DenseMatrix) -> Result<()> {
    fs::write(path, encode_fmat(m)?)?;
    Ok(())
}

/// Convolution geometry recorded alongside a reshaped kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvHeader {
    pub c_out: usize,
    pub c_in: usize,
    pub kernel: [usize; 2],
    pub stride: [usize; 2],
    pub dilation: [usize; 2],
    pub padding: [usize; 2],
    pub groups: usize,
}

impl From<ConvSpec> for ConvHeader {
    fn from(s: ConvSpec) -> Self {
        Self {
            c_out: s.c_out,
            c_in: s.c_in,
            kernel: [s.kernel.0, s.kernel.1],
            stride: [s.stride.0, s.stride.1],
            dilation: [s.dilation.0, s.dilation.1],
            padding: [s.padding.0, s.padding.1],
            groups: s.groups,
        }
    }
}

impl From<ConvHeader> for ConvSpec {
    fn from(h: ConvHeader) -> Self {
        Self {
            c_out: h.c_out,
            c_in: h.c_in,
            kernel: (h.kernel[0], h.kernel[1]),
            stride: (h.stride[0], h.stride[1]),
            dilation: (h.dilation[0], h.dilation[1]),
            padding: (h.padding[0], h.padding[1]),
            groups: h.groups,
        }
    }
}

/// JSON header of a `.tsvd` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsvdHeader {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub theta: f64,
    /// Reshape index 0..=3 for convolution kernels.
    pub form: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conv: Option<ConvHeader>,
    pub tol_achieved: f64,
    pub error_norm: String,
    pub sparsity: f64,
}

/// A factorization with the metadata stored next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvdFile {
    pub header: TsvdHeader,
    pub factorization: TsvdFactorization,
}

impl TsvdFile {
    pub fn new(
        factorization: TsvdFactorization,
        tol_achieved: f64,
        error_norm: &str,
        conv: Option<ConvSpec>,
    ) -> Self {
        let (m, n) = factorization.shape();
        let header = TsvdHeader {
            m,
            n,
            k: factorization.rank(),
            theta: factorization.theta(),
            form: factorization.form().map(FormType::index),
            conv: conv.map(ConvHeader::from),
            tol_achieved,
            error_norm: error_norm.to_owned(),
            sparsity: factorization.sparsity(),
        };
        Self {
            header,
            factorization,
        }
    }
}

/// Encodes a `.tsvd` container; singular values are rounded to `f32`.
pub fn encode_tsvd(file: &TsvdFile) -> Result<Vec<u8>> {
    let f = &file.factorization;
    let header = serde_json::to_vec(&file.header).map_err(|e| FormatError::Header {
        offset: 10,
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    out.extend_from_slice(TSVD_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&dim(header.len(), "header length")?.to_le_bytes());
    out.extend_from_slice(&header);
    for &s in f.s() {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    out.extend_from_slice(f.u().payload());
    out.extend_from_slice(f.v().payload());
    Ok(out)
}

pub fn decode_tsvd(bytes: &[u8]) -> Result<TsvdFile> {
    let mut r = Reader::new(bytes);
    r.magic(TSVD_MAGIC)?;
    r.version()?;
    let header_len = r.u32("header length")? as usize;
    let header_offset = r.pos;
    let raw = r.take(header_len, "JSON header")?;
    let header: TsvdHeader = serde_json::from_slice(raw).map_err(|e| FormatError::Header {
        offset: header_offset,
        message: e.to_string(),
    })?;
    let form = match header.form {
        None => None,
        Some(i) => Some(FormType::from_index(i).ok_or_else(|| FormatError::Header {
            offset: header_offset,
            message: format!("form index {i} is not in 0..=3"),
        })?),
    };
    if !header.theta.is_finite() {
        return Err(FormatError::Header {
            offset: header_offset,
            message: "theta is not finite".into(),
        });
    }
    let s = r.f32s(header.k, "singular values")?;
    let u_len = header
        .m
        .checked_mul(TernaryMatrix::bytes_per_row(header.k))
        .ok_or(FormatError::TooLarge("U payload size overflows"))?;
    let u_offset = r.pos;
    let u_bytes = r.take(u_len, "U payload")?;
    let u = TernaryMatrix::from_payload(header.m, header.k, u_bytes).map_err(|source| {
        FormatError::Payload {
            what: "U",
            offset: u_offset,
            source,
        }
    })?;
    let v_len = header
        .k
        .checked_mul(TernaryMatrix::bytes_per_row(header.n))
        .ok_or(FormatError::TooLarge("V payload size overflows"))?;
    let v_offset = r.pos;
    let v_bytes = r.take(v_len, "V payload")?;
    let v = TernaryMatrix::from_payload(header.k, header.n, v_bytes).map_err(|source| {
        FormatError::Payload {
            what: "V",
            offset: v_offset,
            source,
        }
    })?;
    r.finish()?;
    let factorization = TsvdFactorization::new(u, s, v, header.theta)
        .expect("sizes follow the header")
        .with_form(form);
    Ok(TsvdFile {
        header,
        factorization,
    })
}

pub fn read_tsvd(path: &Path) -> Result<TsvdFile> {
    decode_tsvd(&fs::read(path)?)
}

pub fn write_tsvd(path: &Path, file: &TsvdFile) -> Result<()> {
    fs::write(path, encode_tsvd(file)?)?;
    Ok(())
}
