// SPDX-License-Identifier: Apache-2.0

//! `HTM1` model files: a small header with the architecture followed by the
//! weights as little-endian `f64` in row-major order.

use ndarray::{Array1, Array2};

use crate::graph::VOCAB_VERSION;
use crate::node::Dialect;

use super::layers::Readout;
use super::model::{ModelConfig, ModelParams};
use super::GnnError;

const MAGIC: &[u8; 4] = b"HTM1";

pub fn save_model(params: &ModelParams) -> Vec<u8> {
    let c = &params.config;
    let mut out = Vec::with_capacity(64 + 8 * params.num_parameters());
    out.extend_from_slice(MAGIC);
    out.push(c.dialect.as_byte());
    out.extend_from_slice(&VOCAB_VERSION.to_le_bytes());
    out.extend_from_slice(&(c.input_dim as u32).to_le_bytes());
    out.extend_from_slice(&(c.hidden.len() as u32).to_le_bytes());
    for &h in &c.hidden {
        out.extend_from_slice(&(h as u32).to_le_bytes());
    }
    out.extend_from_slice(&c.pool_ratio.to_le_bytes());
    out.push(c.readout.as_byte());
    out.extend_from_slice(&c.dropout.to_le_bytes());
    for block in params.blocks() {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], GnnError> {
        if self.buf.len() - self.pos < n {
            return Err(GnnError::CorruptFile(format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8, GnnError> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32, GnnError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64, GnnError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn floats(&mut self, n: usize, what: &str) -> Result<Vec<f64>, GnnError> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| GnnError::CorruptFile(what.into()))?, what)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
}

pub fn load_model(bytes: &[u8]) -> Result<ModelParams, GnnError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(GnnError::CorruptFile("bad magic".into()));
    }
    let dialect = Dialect::from_byte(r.u8("dialect")?).ok_or_else(|| GnnError::CorruptFile("bad dialect".into()))?;
    let version = r.u32("vocabulary version")?;
    if version != VOCAB_VERSION {
        return Err(GnnError::VersionMismatch { expected: VOCAB_VERSION, found: version });
    }
    let input_dim = r.u32("input width")? as usize;
    let layers = r.u32("layer count")? as usize;
    if layers > (bytes.len() - r.pos) / 4 {
        return Err(GnnError::CorruptFile("layer count exceeds file size".into()));
    }
    let hidden = (0..layers).map(|_| r.u32("layer width").map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
    let pool_ratio = r.f64("pooling ratio")?;
    let readout = Readout::from_byte(r.u8("readout")?).ok_or_else(|| GnnError::CorruptFile("bad readout".into()))?;
    let dropout = r.f64("dropout")?;
    let config = ModelConfig { dialect, input_dim, hidden, pool_ratio, readout, dropout };
    config.validate().map_err(|e| GnnError::CorruptFile(e.to_string()))?;

    let mut dims = vec![input_dim];
    dims.extend(&config.hidden);
    let mut gcn = Vec::with_capacity(layers);
    for w in dims.windows(2) {
        let data = r.floats(w[0] * w[1], "GCN weights")?;
        gcn.push(Array2::from_shape_vec((w[0], w[1]), data).expect("shape matches length"));
    }
    let h = config.embedding_dim();
    let score = Array1::from(r.floats(h, "scoring weights")?);
    let mlp_w = Array2::from_shape_vec((h, 2), r.floats(2 * h, "MLP weights")?).expect("shape matches length");
    let mlp_b = Array1::from(r.floats(2, "MLP bias")?);
    if r.pos != bytes.len() {
        return Err(GnnError::CorruptFile(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let params = ModelParams { config, gcn, score, mlp_w, mlp_b };
    if !params.is_finite() {
        return Err(GnnError::CorruptFile("non-finite weight".into()));
    }
    Ok(params)
}
