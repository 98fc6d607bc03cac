//! Versioned binary model files.
//!
//! Layout, little-endian: magic "MMLP", version u16 = 1, layer-dim count
//! u32, dims as u32 each, then per layer the weight matrix followed by the
//! bias vector, all stored as f64.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{MlpModel, NeuralError};
use crate::real::Real;

const MAGIC: [u8; 4] = *b"MMLP";
const VERSION: u16 = 1;

/// Writes the model. Parameters are stored as f64, so the round trip is
/// lossless at pipeline precision.
pub fn save_model<T: Real>(model: &MlpModel<T>, path: &Path) -> Result<(), NeuralError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(model.dims().len() as u32).to_le_bytes())?;
    for &d in model.dims() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for l in 0..model.layer_count() {
        for v in model.weights(l) {
            w.write_all(&v.to_f64c().to_le_bytes())?;
        }
        for v in model.biases(l) {
            w.write_all(&v.to_f64c().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_buf<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>, NeuralError> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)
        .map_err(|_| NeuralError::MalformedModel("file truncated".into()))?;
    Ok(buf)
}

/// Reads a model file.
pub fn load_model<T: Real>(path: &Path) -> Result<MlpModel<T>, NeuralError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let magic = read_buf(&mut r, 4)?;
    if magic != MAGIC {
        return Err(NeuralError::MalformedModel("bad magic bytes".into()));
    }
    let version = u16::from_le_bytes(read_buf(&mut r, 2)?.try_into().unwrap());
    if version != VERSION {
        return Err(NeuralError::MalformedModel(format!(
            "unsupported version {version}"
        )));
    }
    let n_dims = u32::from_le_bytes(read_buf(&mut r, 4)?.try_into().unwrap()) as usize;
    if !(2..=64).contains(&n_dims) {
        return Err(NeuralError::MalformedModel(format!(
            "implausible layer-dim count {n_dims}"
        )));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        dims.push(u32::from_le_bytes(read_buf(&mut r, 4)?.try_into().unwrap()) as usize);
    }
    let mut weights = Vec::with_capacity(n_dims - 1);
    let mut biases = Vec::with_capacity(n_dims - 1);
    for l in 0..n_dims - 1 {
        let read_vec = |r: &mut BufReader<std::fs::File>, n: usize| -> Result<Vec<T>, NeuralError> {
            let raw = read_buf(r, n * 8)?;
            Ok(raw
                .chunks_exact(8)
                .map(|b| T::from_f64c(f64::from_le_bytes(b.try_into().unwrap())))
                .collect())
        };
        weights.push(read_vec(&mut r, dims[l] * dims[l + 1])?);
        biases.push(read_vec(&mut r, dims[l + 1])?);
    }
    MlpModel::from_parts(dims, weights, biases)
        .map_err(|e| NeuralError::MalformedModel(e.to_string()))
}

/// Loads a model and checks it against the expected layer dims.
pub fn load_model_expecting<T: Real>(
    path: &Path,
    expected_dims: &[usize],
) -> Result<MlpModel<T>, NeuralError> {
    let model = load_model(path)?;
    if model.dims() != expected_dims {
        return Err(NeuralError::Shape(format!(
            "model dims {:?} do not match expected {:?}",
            model.dims(),
            expected_dims
        )));
    }
    Ok(model)
}
