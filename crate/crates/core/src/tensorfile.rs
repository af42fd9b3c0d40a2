//! Binary tensor files shared by encoded inputs and model checkpoints.
//!
//! A file holds one or more named tensors (little endian):
//!
//! ```text
//! magic  b"TNSR"
//! version u32 (1)
//! count  u32
//! per tensor:
//!   name_len u32, name utf-8
//!   dtype u8 (0 = f64, 1 = i64)
//!   ndim u32, dims u64 x ndim
//!   data f64 or i64 x prod(dims)
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TNSR";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    F64(Vec<f64>),
    I64(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: TensorData,
}

impl NamedTensor {
    pub fn f64(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            shape,
            data: TensorData::F64(data),
        }
    }

    pub fn i64(name: impl Into<String>, shape: Vec<usize>, data: Vec<i64>) -> Self {
        Self {
            name: name.into(),
            shape,
            data: TensorData::I64(data),
        }
    }

    fn len(&self) -> usize {
        match &self.data {
            TensorData::F64(v) => v.len(),
            TensorData::I64(v) => v.len(),
        }
    }
}

pub fn write_tensors<W: Write>(mut w: W, tensors: &[NamedTensor]) -> Result<()> {
    let io = |e: std::io::Error| Error::invalid(format!("tensor file: {e}"));
    for t in tensors {
        if t.shape.iter().product::<usize>() != t.len() {
            return Err(Error::Dimension {
                expected: t.shape.iter().product(),
                found: t.len(),
            });
        }
    }
    w.write_all(MAGIC).map_err(io)?;
    w.write_u32::<LittleEndian>(VERSION).map_err(io)?;
    w.write_u32::<LittleEndian>(tensors.len() as u32).map_err(io)?;
    for t in tensors {
        w.write_u32::<LittleEndian>(t.name.len() as u32).map_err(io)?;
        w.write_all(t.name.as_bytes()).map_err(io)?;
        let dtype = match t.data {
            TensorData::F64(_) => 0,
            TensorData::I64(_) => 1,
        };
        w.write_u8(dtype).map_err(io)?;
        w.write_u32::<LittleEndian>(t.shape.len() as u32).map_err(io)?;
        for &d in &t.shape {
            w.write_u64::<LittleEndian>(d as u64).map_err(io)?;
        }
        match &t.data {
            TensorData::F64(v) => v.iter().try_for_each(|&x| w.write_f64::<LittleEndian>(x)),
            TensorData::I64(v) => v.iter().try_for_each(|&x| w.write_i64::<LittleEndian>(x)),
        }
        .map_err(io)?;
    }
    Ok(())
}

pub fn read_tensors<R: Read>(mut r: R) -> Result<Vec<NamedTensor>> {
    let io = |e: std::io::Error| Error::invalid(format!("tensor file: {e}"));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::invalid("tensor file: bad magic"));
    }
    let version = r.read_u32::<LittleEndian>().map_err(io)?;
    if version != VERSION {
        return Err(Error::invalid(format!("tensor file: unsupported version {version}")));
    }
    let count = r.read_u32::<LittleEndian>().map_err(io)?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let n = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let mut name = vec![0u8; n];
        r.read_exact(&mut name).map_err(io)?;
        let name = String::from_utf8(name).map_err(|_| Error::invalid("tensor file: name is not utf-8"))?;
        let dtype = r.read_u8().map_err(io)?;
        let ndim = r.read_u32::<LittleEndian>().map_err(io)?;
        let shape = (0..ndim)
            .map(|_| r.read_u64::<LittleEndian>().map(|d| d as usize))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(io)?;
        let len: usize = shape.iter().product();
        let data = match dtype {
            0 => TensorData::F64(
                (0..len)
                    .map(|_| r.read_f64::<LittleEndian>())
                    .collect::<std::io::Result<_>>()
                    .map_err(io)?,
            ),
            1 => TensorData::I64(
                (0..len)
                    .map(|_| r.read_i64::<LittleEndian>())
                    .collect::<std::io::Result<_>>()
                    .map_err(io)?,
            ),
            d => return Err(Error::invalid(format!("tensor file: unknown dtype {d}"))),
        };
        out.push(NamedTensor { name, shape, data });
    }
    Ok(out)
}
