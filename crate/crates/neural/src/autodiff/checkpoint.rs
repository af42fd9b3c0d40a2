//! Parameter checkpoints: a tensor file (see `sentio_core::tensorfile`)
//! holding one f64 tensor per parameter, next to a JSON metadata file with
//! the same stem.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sentio_core::tensorfile::{read_tensors, write_tensors, NamedTensor, TensorData};

use super::param::ParamSet;
use super::tensor::Tensor;
use crate::error::{NeuralError, Result};

pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn save_checkpoint<M: Serialize>(path: &Path, params: &ParamSet, meta: &M) -> Result<()> {
    let tensors: Vec<NamedTensor> = params
        .iter()
        .map(|p| NamedTensor::f64(p.name.clone(), p.value.shape().to_vec(), p.value.data().to_vec()))
        .collect();
    let io = |source| NeuralError::Io { path: path.to_path_buf(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_tensors(&mut w, &tensors)?;
    std::io::Write::flush(&mut w).map_err(io)?;
    let mp = meta_path(path);
    let json = serde_json::to_string_pretty(meta)?;
    std::fs::write(&mp, json + "\n").map_err(|source| NeuralError::Io { path: mp, source })?;
    Ok(())
}

/// Reads the tensors of `path` and the metadata beside it.
pub fn load_checkpoint<M: DeserializeOwned>(path: &Path) -> Result<(ParamSet, M)> {
    let bad = |message: String| NeuralError::Checkpoint { path: path.to_path_buf(), message };
    let f = File::open(path).map_err(|source| NeuralError::Io { path: path.to_path_buf(), source })?;
    let mut params = ParamSet::new();
    for t in read_tensors(BufReader::new(f))? {
        let TensorData::F64(data) = t.data else {
            return Err(bad(format!("parameter {} is not f64", t.name)));
        };
        params.push(t.name, Tensor::new(t.shape, data).map_err(|e| bad(e.to_string()))?);
    }
    let mp = meta_path(path);
    let text = std::fs::read_to_string(&mp).map_err(|source| NeuralError::Io { path: mp, source })?;
    Ok((params, serde_json::from_str(&text)?))
}
