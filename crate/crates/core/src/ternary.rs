//! Ternary vectors and bit-packed ternary matrices.
//!
//! Matrices are stored row-major with two bits per entry:
//!
//! ```text
//! 00 -> 0    01 -> +1    10 -> -1    11 -> rejected
//! ```
//!
//! Entry `j` of a row lives in byte `j / 4` at bit offset `2 * (j % 4)`
//! (least significant pair first). Every row starts on a byte boundary and
//! unused trailing pairs of the last byte must be zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Result, TsvdError};

const CODE_ZERO: u8 = 0b00;
const CODE_POS: u8 = 0b01;
const CODE_NEG: u8 = 0b10;
const CODE_FORBIDDEN: u8 = 0b11;

#[inline]
fn encode(t: i8) -> u8 {
    match t {
        1 => CODE_POS,
        -1 => CODE_NEG,
        _ => CODE_ZERO,
    }
}

#[inline]
fn decode(code: u8) -> Option<i8> {
    match code {
        CODE_ZERO => Some(0),
        CODE_POS => Some(1),
        CODE_NEG => Some(-1),
        _ => None,
    }
}

fn check_trits(values: &[i8]) -> Result<()> {
    match values.iter().find(|v| !matches!(**v, -1..=1)) {
        Some(&bad) => Err(TsvdError::InvalidTrit(bad)),
        None => Ok(()),
    }
}

/// A vector with entries in {-1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TernaryVector {
    entries: Vec<i8>,
}

impl TernaryVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        check_trits(&entries)?;
        Ok(Self { entries })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            entries: vec![0; len],
        }
    }

    /// Caller guarantees every entry is a valid trit.
    pub(crate) fn from_trusted(entries: Vec<i8>) -> Self {
        debug_assert!(check_trits(&entries).is_ok());
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|&&t| t != 0).count()
    }

    /// Euclidean norm, `sqrt(nnz)`.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.nnz() as f64)
    }

    /// Inner product with a real vector using only additions.
    pub fn dot(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&t, &xi) in self.entries.iter().zip(x) {
            match t {
                1 => acc += xi,
                -1 => acc -= xi,
                _ => {}
            }
        }
        acc
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|&t| t as f64).collect()
    }
}

/// A row-major ternary matrix packed at two bits per entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TernaryMatrix {
    rows: usize,
    cols: usize,
    row_bytes: usize,
    payload: Vec<u8>,
}

impl TernaryMatrix {
    /// Number of payload bytes used by one row of `cols` entries.
    pub const fn bytes_per_row(cols: usize) -> usize {
        cols.div_ceil(4)
    }

    /// Total payload length for a `rows x cols` matrix.
    pub const fn payload_len(rows: usize, cols: usize) -> usize {
        rows * Self::bytes_per_row(cols)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_bytes: Self::bytes_per_row(cols),
            payload: vec![0; Self::payload_len(rows, cols)],
        }
    }

    /// Builds a matrix from row-major trits.
    pub fn from_trits(rows: usize, cols: usize, trits: &[i8]) -> Result<Self> {
        if trits.len() != rows * cols {
            return Err(TsvdError::DimensionMismatch {
                expected: rows * cols,
                found: trits.len(),
            });
        }
        check_trits(trits)?;
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            let row = &mut m.payload[i * m.row_bytes..(i + 1) * m.row_bytes];
            for (j, &t) in trits[i * cols..(i + 1) * cols].iter().enumerate() {
                row[j / 4] |= encode(t) << (2 * (j % 4));
            }
        }
        Ok(m)
    }

    /// Stacks ternary vectors as the rows of a matrix.
    pub fn from_rows(cols: usize, rows: &[TernaryVector]) -> Result<Self> {
        let mut trits = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(TsvdError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            trits.extend_from_slice(r.as_slice());
        }
        Self::from_trits(rows.len(), cols, &trits)
    }

    /// Places ternary vectors side by side as the columns of a matrix.
    pub fn from_columns(rows: usize, columns: &[TernaryVector]) -> Result<Self> {
        let k = columns.len();
        let mut trits = vec![0i8; rows * k];
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(TsvdError::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, &t) in col.as_slice().iter().enumerate() {
                trits[i * k + c] = t;
            }
        }
        Self::from_trits(rows, k, &trits)
    }

    /// Decodes a packed payload, rejecting code `11` and dirty padding.
    pub fn from_payload(rows: usize, cols: usize, payload: &[u8]) -> Result<Self> {
        let expected = Self::payload_len(rows, cols);
        if payload.len() != expected {
            return Err(TsvdError::PayloadLength {
                expected,
                found: payload.len(),
            });
        }
        let row_bytes = Self::bytes_per_row(cols);
        for i in 0..rows {
            let row = &payload[i * row_bytes..(i + 1) * row_bytes];
            for (b, &byte) in row.iter().enumerate() {
                for slot in 0..4 {
                    let j = b * 4 + slot;
                    let code = (byte >> (2 * slot)) & 0b11;
                    if j >= cols {
                        if code != 0 {
                            return Err(TsvdError::NonZeroPadding { row: i });
                        }
                    } else if code == CODE_FORBIDDEN {
                        return Err(TsvdError::ForbiddenCode {
                            index: i * cols + j,
                        });
                    }
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_bytes,
            payload: payload.to_vec(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        let byte = self.payload[i * self.row_bytes + j / 4];
        // Construction rejects code 11, so decode cannot fail here.
        decode((byte >> (2 * (j % 4))) & 0b11).unwrap_or(0)
    }

    /// Decodes row `i` into `out` (length `cols`).
    pub fn row_into(&self, i: usize, out: &mut [i8]) {
        let row = &self.payload[i * self.row_bytes..(i + 1) * self.row_bytes];
        for (j, o) in out.iter_mut().enumerate().take(self.cols) {
            *o = decode((row[j / 4] >> (2 * (j % 4))) & 0b11).unwrap_or(0);
        }
    }

    pub fn row(&self, i: usize) -> TernaryVector {
        let mut out = vec![0i8; self.cols];
        self.row_into(i, &mut out);
        TernaryVector::from_trusted(out)
    }

    pub fn column(&self, j: usize) -> TernaryVector {
        TernaryVector::from_trusted((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    /// All entries, row-major.
    pub fn to_trits(&self) -> Vec<i8> {
        let mut out = vec![0i8; self.rows * self.cols];
        for i in 0..self.rows {
            self.row_into(i, &mut out[i * self.cols..(i + 1) * self.cols]);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let trits = self.to_trits();
        let mut t = vec![0i8; trits.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[j * self.rows + i] = trits[i * self.cols + j];
            }
        }
        TernaryMatrix::from_trits(self.cols, self.rows, &t).expect("transpose preserves trits")
    }

    /// Selects a subset of columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let cols: Vec<TernaryVector> = keep.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.rows, &cols).expect("columns have matching length")
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let rows: Vec<TernaryVector> = keep.iter().map(|&i| self.row(i)).collect();
        Self::from_rows(self.cols, &rows).expect("rows have matching length")
    }

    pub fn nnz(&self) -> usize {
        // 00 is the only zero code, so count non-zero bit pairs.
        self.payload
            .iter()
            .map(|&b| {
                let pairs = (b | (b >> 1)) & 0b0101_0101;
                pairs.count_ones() as usize
            })
            .sum()
    }

    /// Fraction of non-zero entries.
    pub fn sparsity(&self) -> f64 {
        let total = self.rows * self.cols;
        if total == 0 {
            0.0
        } else {
            self.nnz() as f64 / total as f64
        }
    }

    /// Addition-only product `t * x`.
    ///
    /// Each output accumulates in ascending column order starting from
    /// `0.0`, adding `x[j]` for `+1` and subtracting it for `-1`. The
    /// returned count is the number of add/sub instructions, `nnz(t)`.
    pub fn matvec(&self, x: &[f64]) -> Result<(Vec<f64>, u64)> {
        if x.len() != self.cols {
            return Err(TsvdError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.rows];
        let mut adds = 0u64;
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.payload[i * self.row_bytes..(i + 1) * self.row_bytes];
            let mut acc = 0.0;
            for (b, &byte) in row.iter().enumerate() {
                if byte == 0 {
                    continue;
                }
                for slot in 0..4 {
                    match (byte >> (2 * slot)) & 0b11 {
                        CODE_POS => {
                            acc += x[b * 4 + slot];
                            adds += 1;
                        }
                        CODE_NEG => {
                            acc -= x[b * 4 + slot];
                            adds += 1;
                        }
                        _ => {}
                    }
                }
            }
            *yi = acc;
        }
        Ok((y, adds))
    }
}

/// Sign-split bit planes of a ternary vector, for popcount inner products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitPlanes {
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl BitPlanes {
    pub(crate) fn new(v: &TernaryVector) -> Self {
        let words = v.len().div_ceil(64);
        let mut pos = vec![0u64; words];
        let mut neg = vec![0u64; words];
        for (i, &t) in v.as_slice().iter().enumerate() {
            match t {
                1 => pos[i / 64] |= 1 << (i % 64),
                -1 => neg[i / 64] |= 1 << (i % 64),
                _ => {}
            }
        }
        Self { pos, neg }
    }

    /// Exact integer inner product of two ternary vectors.
    pub(crate) fn dot(&self, other: &Self) -> i64 {
        let mut same = 0u32;
        let mut diff = 0u32;
        for w in 0..self.pos.len() {
            let (p, n) = (self.pos[w], self.neg[w]);
            let (q, m) = (other.pos[w], other.neg[w]);
            same += (p & q).count_ones() + (n & m).count_ones();
            diff += (p & m).count_ones() + (n & q).count_ones();
        }
        same as i64 - diff as i64
    }
}

/// Non-zero positions of a ternary vector with their signs.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Support {
    pub(crate) idx: Vec<u32>,
    pub(crate) sign: Vec<f64>,
}

impl Support {
    pub(crate) fn new(v: &TernaryVector) -> Self {
        let mut idx = Vec::new();
        let mut sign = Vec::new();
        for (i, &t) in v.as_slice().iter().enumerate() {
            if t != 0 {
                idx.push(i as u32);
                sign.push(t as f64);
            }
        }
        Self { idx, sign }
    }

    pub(crate) fn len(&self) -> usize {
        self.idx.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_matrices(rows: usize, cols: usize) -> impl Iterator<Item = Vec<i8>> {
        let n = rows * cols;
        (0..3usize.pow(n as u32)).map(move |mut code| {
            let mut v = vec![0i8; n];
            for e in v.iter_mut() {
                *e = (code % 3) as i8 - 1;
                code /= 3;
            }
            v
        })
    }

    #[test]
    fn exhaustive_round_trip_small_shapes() {
        for (r, c) in [
            (1, 1),
            (1, 5),
            (2, 3),
            (3, 2),
            (3, 3),
            (1, 9),
            (9, 1),
            (2, 4),
        ] {
            for trits in all_matrices(r, c) {
                let m = TernaryMatrix::from_trits(r, c, &trits).unwrap();
                assert_eq!(m.to_trits(), trits);
                let again = TernaryMatrix::from_payload(r, c, m.payload()).unwrap();
                assert_eq!(again.payload(), m.payload());
                assert_eq!(m.nnz(), trits.iter().filter(|&&t| t != 0).count());
            }
        }
    }

    #[test]
    fn codes_are_fixed() {
        let m = TernaryMatrix::from_trits(1, 4, &[0, 1, -1, 1]).unwrap();
        assert_eq!(m.payload(), &[0b01_10_01_00]);
        let m = TernaryMatrix::from_trits(2, 5, &[1, 0, 0, 0, -1, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(m.payload(), &[0b01, 0b10, 0b00, 0b01]);
    }

    #[test]
    fn forbidden_code_rejected() {
        let err = TernaryMatrix::from_payload(1, 4, &[0b00_11_00_00]).unwrap_err();
        assert_eq!(err, TsvdError::ForbiddenCode { index: 2 });
    }

    #[test]
    fn dirty_padding_rejected() {
        let err = TernaryMatrix::from_payload(1, 3, &[0b01_00_00_00]).unwrap_err();
        assert_eq!(err, TsvdError::NonZeroPadding { row: 0 });
    }

    #[test]
    fn wrong_payload_length_rejected() {
        let err = TernaryMatrix::from_payload(2, 5, &[0, 0, 0]).unwrap_err();
        assert_eq!(
            err,
            TsvdError::PayloadLength {
                expected: 4,
                found: 3
            }
        );
    }

    #[test]
    fn invalid_trit_rejected() {
        assert_eq!(
            TernaryVector::new(vec![0, 2]).unwrap_err(),
            TsvdError::InvalidTrit(2)
        );
        assert!(TernaryMatrix::from_trits(1, 2, &[1, -3]).is_err());
    }

    #[test]
    fn identity_matvec() {
        let t = TernaryMatrix::from_trits(2, 2, &[1, 0, 0, 1]).unwrap();
        let (y, adds) = t.matvec(&[3.0, 7.0]).unwrap();
        assert_eq!(y, vec![3.0, 7.0]);
        assert_eq!(adds, 2);
    }

    #[test]
    fn hand_computed_matvec() {
        let t = TernaryMatrix::from_trits(2, 2, &[1, 1, 1, -1]).unwrap();
        let (y, adds) = t.matvec(&[1.0, 2.0]).unwrap();
        assert_eq!(y, vec![3.0, -1.0]);
        assert_eq!(adds, 4);
    }

    #[test]
    fn matvec_rejects_wrong_length() {
        let t = TernaryMatrix::zeros(2, 3);
        assert_eq!(
            t.matvec(&[1.0]).unwrap_err(),
            TsvdError::DimensionMismatch {
                expected: 3,
                found: 1
            }
        );
    }

    #[test]
    fn columns_and_rows_agree_with_transpose() {
        let trits = [1, 0, -1, 0, 1, 1];
        let m = TernaryMatrix::from_trits(2, 3, &trits).unwrap();
        let t = m.transpose();
        assert_eq!(t.shape(), (3, 2));
        for i in 0..2 {
            assert_eq!(m.row(i), t.column(i));
        }
        let cols: Vec<_> = (0..3).map(|j| m.column(j)).collect();
        assert_eq!(TernaryMatrix::from_columns(2, &cols).unwrap(), m);
    }

    #[test]
    fn bitplane_dot_matches_integer_dot() {
        let a = TernaryVector::new((0..130).map(|i| ((i * 7) % 3) as i8 - 1).collect()).unwrap();
        let b =
            TernaryVector::new((0..130).map(|i| ((i * 5 + 1) % 3) as i8 - 1).collect()).unwrap();
        let expected: i64 = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| (x * y) as i64)
            .sum();
        assert_eq!(BitPlanes::new(&a).dot(&BitPlanes::new(&b)), expected);
    }
}
