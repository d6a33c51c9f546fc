//! Versioned little-endian binary model file.
//!
//! ```text
//! magic "FFMODEL\0" | u32 version | u8 variant | u32 inputs | u32 layers
//! per layer: u8 kind (0 dense, 1 batch norm) | u32 n_in | u32 n_out
//! u32 epochs | f64 final_loss | f64 rmse
//! f64 parameters: norm min, norm max, then per layer
//!   dense: w (n_out x n_in, row-major), b
//!   batch norm: gamma, beta, running mean, running var
//! ```

use std::path::Path;

use super::nn::{Layer, Normalizer, ReadoutModel, TrainMetrics, Variant};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"FFMODEL\0";
pub const VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

pub fn to_bytes(model: &ReadoutModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(model.variant.code());
    out.extend_from_slice(&(model.n_inputs() as u32).to_le_bytes());
    out.extend_from_slice(&(model.layers.len() as u32).to_le_bytes());
    for l in &model.layers {
        let (kind, n_in, n_out) = match l {
            Layer::Dense { n_in, n_out, .. } => (0u8, *n_in, *n_out),
            Layer::BatchNorm { n, .. } => (1u8, *n, *n),
        };
        out.push(kind);
        out.extend_from_slice(&(n_in as u32).to_le_bytes());
        out.extend_from_slice(&(n_out as u32).to_le_bytes());
    }
    out.extend_from_slice(&(model.metrics.epochs as u32).to_le_bytes());
    out.extend_from_slice(&model.metrics.final_loss.to_le_bytes());
    out.extend_from_slice(&model.metrics.rmse.to_le_bytes());
    let mut put = |v: &[f64]| {
        for x in v {
            out.extend_from_slice(&x.to_le_bytes());
        }
    };
    put(&model.norm.min);
    put(&model.norm.max);
    for l in &model.layers {
        match l {
            Layer::Dense { w, b, .. } => {
                put(w);
                put(b);
            }
            Layer::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                ..
            } => {
                put(gamma);
                put(beta);
                put(running_mean);
                put(running_var);
            }
        }
    }
    out
}

struct Reader<'a> {
    b: &'a [u8],
    i: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.i.checked_add(n).filter(|&e| e <= self.b.len());
        let end = end.ok_or_else(|| bad(format!("truncated at byte {}", self.i)))?;
        let s = &self.b[self.i..end];
        self.i = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn vec(&mut self, n: usize) -> Result<Vec<f64>> {
        if n > self.b.len() / 8 {
            return Err(bad(format!("parameter block of {n} values exceeds the file")));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<ReadoutModel> {
    let mut r = Reader { b: bytes, i: 0 };
    if r.take(8)? != MAGIC {
        return Err(bad("not a model file (bad magic)"));
    }
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let variant = Variant::from_code(r.u8()?).ok_or_else(|| bad("unknown variant"))?;
    let n_inputs = r.u32()?;
    let n_layers = r.u32()?;
    if n_layers == 0 || n_layers > 16 {
        return Err(bad(format!("implausible layer count {n_layers}")));
    }
    let mut shapes = Vec::with_capacity(n_layers);
    let mut prev = n_inputs;
    for k in 0..n_layers {
        let (kind, n_in, n_out) = (r.u8()?, r.u32()?, r.u32()?);
        if n_in != prev || (kind == 1 && n_in != n_out) || kind > 1 || n_out == 0 {
            return Err(bad(format!("layer {k} has inconsistent shape")));
        }
        shapes.push((kind, n_in, n_out));
        prev = n_out;
    }
    if prev != 1 {
        return Err(bad("network must end in a single output"));
    }
    let metrics = TrainMetrics {
        epochs: r.u32()?,
        final_loss: r.f64()?,
        rmse: r.f64()?,
    };
    let norm = Normalizer {
        min: r.vec(n_inputs)?,
        max: r.vec(n_inputs)?,
    };
    let mut layers = Vec::with_capacity(n_layers);
    for (kind, n_in, n_out) in shapes {
        layers.push(if kind == 0 {
            Layer::Dense {
                n_in,
                n_out,
                w: r.vec(n_in.checked_mul(n_out).ok_or_else(|| bad("layer too large"))?)?,
                b: r.vec(n_out)?,
            }
        } else {
            Layer::BatchNorm {
                n: n_in,
                gamma: r.vec(n_in)?,
                beta: r.vec(n_in)?,
                running_mean: r.vec(n_in)?,
                running_var: r.vec(n_in)?,
            }
        });
    }
    if r.i != bytes.len() {
        return Err(bad(format!("{} trailing bytes", bytes.len() - r.i)));
    }
    let model = ReadoutModel {
        variant,
        norm,
        layers,
        metrics,
    };
    if !model.all_finite() {
        return Err(bad("non-finite parameter"));
    }
    Ok(model)
}

pub fn save(model: &ReadoutModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ReadoutModel> {
    from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ReadoutModel {
        let norm = Normalizer {
            min: vec![0.0; 64],
            max: vec![1.0; 64],
        };
        ReadoutModel::new(Variant::Full, norm, 3)
    }

    #[test]
    fn round_trip() {
        let m = model();
        let b = to_bytes(&m);
        assert_eq!(&b[..8], MAGIC);
        assert_eq!(from_bytes(&b).unwrap(), m);
    }

    #[test]
    fn corrupt_files_rejected() {
        let b = to_bytes(&model());
        assert!(from_bytes(&b[..b.len() - 1]).is_err());
        let mut extra = b.clone();
        extra.push(0);
        assert!(from_bytes(&extra).is_err());
        let mut magic = b.clone();
        magic[0] = b'X';
        assert!(from_bytes(&magic).is_err());
        let mut version = b;
        version[8] = 9;
        assert!(matches!(from_bytes(&version), Err(Error::ModelFormat(_))));
    }
}
