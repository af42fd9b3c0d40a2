//! Compressed sparse row matrices.
//!
//! Binary layout (little endian):
//!
//! ```text
//! magic   b"CSR1"
//! kind    u8      0 = u32 counts, 1 = f64 reals
//! rows    u64
//! cols    u64
//! nnz     u64
//! offsets u64 x (rows + 1)
//! columns u64 x nnz
//! values  u32 or f64 x nnz
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CSR1";

/// Element type storable in a [`CsrMatrix`].
pub trait SparseValue: Copy + PartialEq + Default + Send + Sync + std::fmt::Display {
    const KIND: u8;
    fn to_f64(self) -> f64;
    fn write_le<W: Write>(self, w: &mut W) -> std::io::Result<()>;
    fn read_le<R: Read>(r: &mut R) -> std::io::Result<Self>;
}

impl SparseValue for u32 {
    const KIND: u8 = 0;

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn write_le<W: Write>(self, w: &mut W) -> std::io::Result<()> {
        w.write_u32::<LittleEndian>(self)
    }

    fn read_le<R: Read>(r: &mut R) -> std::io::Result<Self> {
        r.read_u32::<LittleEndian>()
    }
}

impl SparseValue for f64 {
    const KIND: u8 = 1;

    fn to_f64(self) -> f64 {
        self
    }

    fn write_le<W: Write>(self, w: &mut W) -> std::io::Result<()> {
        w.write_f64::<LittleEndian>(self)
    }

    fn read_le<R: Read>(r: &mut R) -> std::io::Result<Self> {
        r.read_f64::<LittleEndian>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<T>,
}

/// Document-term counts.
pub type SparseCountMatrix = CsrMatrix<u32>;
/// Real-valued TF or TF-IDF weights.
pub type TfidfMatrix = CsrMatrix<f64>;

impl<T: SparseValue> CsrMatrix<T> {
    /// Build from per-row `(column, value)` lists. Columns in each row must be
    /// strictly increasing and below `cols`; zero values are dropped.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut columns = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for (i, row) in rows.iter().enumerate() {
            let mut last = None;
            for &(c, v) in row {
                if c >= cols {
                    return Err(Error::Dimension {
                        expected: cols,
                        found: c + 1,
                    });
                }
                if last.is_some_and(|l| c <= l) {
                    return Err(Error::invalid(format!("row {i}: columns not strictly increasing")));
                }
                last = Some(c);
                if v != T::default() {
                    columns.push(c);
                    values.push(v);
                }
            }
            offsets.push(columns.len());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            offsets,
            columns,
            values,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            offsets: vec![0; rows + 1],
            columns: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.columns[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::default(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.rows)
            .map(|i| {
                let mut dense = vec![T::default(); self.cols];
                let (cols, vals) = self.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    dense[c] = v;
                }
                dense
            })
            .collect()
    }

    /// Apply `f(row, col, value)` to every stored entry. Entries mapped to
    /// zero are dropped.
    pub fn map<U: SparseValue>(&self, mut f: impl FnMut(usize, usize, T) -> U) -> CsrMatrix<U> {
        let rows = (0..self.rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, &v)| (c, f(i, c, v))).collect()
            })
            .collect();
        CsrMatrix::from_rows(self.cols, rows).expect("map preserves structure")
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let rows = idx
            .iter()
            .map(|&i| {
                let (cols, vals) = self.row(i);
                cols.iter().copied().zip(vals.iter().copied()).collect()
            })
            .collect();
        Self::from_rows(self.cols, rows).expect("selected rows are valid")
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u8(T::KIND)?;
        for n in [self.rows, self.cols, self.nnz()] {
            w.write_u64::<LittleEndian>(n as u64)?;
        }
        for &o in &self.offsets {
            w.write_u64::<LittleEndian>(o as u64)?;
        }
        for &c in &self.columns {
            w.write_u64::<LittleEndian>(c as u64)?;
        }
        for &v in &self.values {
            v.write_le(&mut w)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::invalid(format!("sparse matrix: {m}"));
        let io = |e: std::io::Error| bad(&e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let kind = r.read_u8().map_err(io)?;
        if kind != T::KIND {
            return Err(bad(&format!("value kind {kind}, expected {}", T::KIND)));
        }
        let mut dims = [0usize; 3];
        for d in &mut dims {
            *d = r.read_u64::<LittleEndian>().map_err(io)? as usize;
        }
        let [rows, cols, nnz] = dims;
        let offsets = (0..=rows)
            .map(|_| r.read_u64::<LittleEndian>().map(|v| v as usize))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(io)?;
        let columns = (0..nnz)
            .map(|_| r.read_u64::<LittleEndian>().map(|v| v as usize))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(io)?;
        let values = (0..nnz)
            .map(|_| T::read_le(&mut r))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(io)?;
        if offsets[0] != 0 || offsets[rows] != nnz || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(bad("inconsistent row offsets"));
        }
        for i in 0..rows {
            let cs = &columns[offsets[i]..offsets[i + 1]];
            if cs.windows(2).any(|w| w[0] >= w[1]) || cs.iter().any(|&c| c >= cols) {
                return Err(bad(&format!("row {i}: invalid column ids")));
            }
        }
        Ok(Self {
            rows,
            cols,
            offsets,
            columns,
            values,
        })
    }

    /// Triplet dump `row,col,value`, one stored entry per line.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let map = |e: csv::Error| Error::invalid(e.to_string());
        out.write_record(["row", "col", "value"]).map_err(map)?;
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                out.write_record([i.to_string(), c.to_string(), v.to_string()])
                    .map_err(map)?;
            }
        }
        out.flush().map_err(|e| Error::invalid(e.to_string()))
    }
}
