//! Parameter checkpoint records (`ndnn-ckpt-v1`).
//!
//! A checkpoint is a JSON manifest listing layers; each layer carries its
//! hyper-parameters and its tensors as flat f64 arrays encoded as
//! little-endian base64. Decoding restores parameters bit-exactly.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::batchnorm::BatchNorm;
use super::conv1d::Conv1d;
use super::dense::Dense;
use super::{NnError, Tensor};

pub const FORMAT_TAG: &str = "ndnn-ckpt-v1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    /// Base64 of the row-major f64 buffer, little-endian.
    pub data: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerRecord {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hyper: BTreeMap<String, f64>,
    pub tensors: Vec<TensorRecord>,
}

/// Standalone manifest for a bare parameter set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub layers: Vec<LayerRecord>,
}

impl Manifest {
    pub fn new(layers: Vec<LayerRecord>) -> Self {
        Manifest { format: FORMAT_TAG.to_string(), layers }
    }

    pub fn check_format(&self) -> Result<(), NnError> {
        if self.format == FORMAT_TAG {
            Ok(())
        } else {
            Err(NnError::BadCheckpoint(format!(
                "format tag {:?}, expected {:?}",
                self.format, FORMAT_TAG
            )))
        }
    }
}

pub fn encode_tensor(name: &str, t: &Tensor) -> TensorRecord {
    let mut bytes = Vec::with_capacity(t.len() * 8);
    for v in t.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    TensorRecord { name: name.to_string(), shape: t.shape().to_vec(), data: BASE64.encode(bytes) }
}

pub fn decode_tensor(rec: &TensorRecord) -> Result<Tensor, NnError> {
    let bytes = BASE64
        .decode(&rec.data)
        .map_err(|e| NnError::BadCheckpoint(format!("tensor {:?}: {e}", rec.name)))?;
    if bytes.len() % 8 != 0 {
        return Err(NnError::BadCheckpoint(format!(
            "tensor {:?}: byte length {} not a multiple of 8",
            rec.name,
            bytes.len()
        )));
    }
    let data: Vec<f64> =
        bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Tensor::from_vec(&rec.shape, data).map_err(|_| {
        NnError::BadCheckpoint(format!("tensor {:?}: shape/volume mismatch", rec.name))
    })
}

fn find_tensor(rec: &LayerRecord, name: &str) -> Result<Tensor, NnError> {
    rec.tensors
        .iter()
        .find(|t| t.name == name)
        .ok_or_else(|| NnError::BadCheckpoint(format!("layer {:?} missing tensor {name:?}", rec.name)))
        .and_then(decode_tensor)
}

fn hyper(rec: &LayerRecord, key: &str) -> Result<f64, NnError> {
    rec.hyper
        .get(key)
        .copied()
        .ok_or_else(|| NnError::BadCheckpoint(format!("layer {:?} missing hyper {key:?}", rec.name)))
}

pub fn dense_record(name: &str, layer: &Dense) -> LayerRecord {
    LayerRecord {
        name: name.to_string(),
        kind: "dense".to_string(),
        hyper: BTreeMap::new(),
        tensors: vec![encode_tensor("weight", &layer.weight), encode_tensor("bias", &layer.bias)],
    }
}

pub fn dense_from_record(rec: &LayerRecord) -> Result<Dense, NnError> {
    Ok(Dense { weight: find_tensor(rec, "weight")?, bias: find_tensor(rec, "bias")? })
}

pub fn conv1d_record(name: &str, layer: &Conv1d) -> LayerRecord {
    let mut h = BTreeMap::new();
    h.insert("kernel_size".to_string(), layer.kernel() as f64);
    h.insert("stride".to_string(), layer.stride as f64);
    h.insert("padding".to_string(), layer.padding as f64);
    LayerRecord {
        name: name.to_string(),
        kind: "conv1d".to_string(),
        hyper: h,
        tensors: vec![encode_tensor("weight", &layer.weight), encode_tensor("bias", &layer.bias)],
    }
}

pub fn conv1d_from_record(rec: &LayerRecord) -> Result<Conv1d, NnError> {
    Ok(Conv1d {
        weight: find_tensor(rec, "weight")?,
        bias: find_tensor(rec, "bias")?,
        stride: hyper(rec, "stride")? as usize,
        padding: hyper(rec, "padding")? as usize,
    })
}

pub fn batchnorm_record(name: &str, layer: &BatchNorm) -> LayerRecord {
    let mut h = BTreeMap::new();
    h.insert("momentum".to_string(), layer.momentum);
    h.insert("epsilon".to_string(), layer.epsilon);
    LayerRecord {
        name: name.to_string(),
        kind: "batchnorm".to_string(),
        hyper: h,
        tensors: vec![
            encode_tensor("scale", &layer.scale),
            encode_tensor("shift", &layer.shift),
            encode_tensor("running_mean", &layer.running_mean),
            encode_tensor("running_var", &layer.running_var),
        ],
    }
}

pub fn batchnorm_from_record(rec: &LayerRecord) -> Result<BatchNorm, NnError> {
    Ok(BatchNorm {
        scale: find_tensor(rec, "scale")?,
        shift: find_tensor(rec, "shift")?,
        running_mean: find_tensor(rec, "running_mean")?,
        running_var: find_tensor(rec, "running_var")?,
        momentum: hyper(rec, "momentum")?,
        epsilon: hyper(rec, "epsilon")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_round_trip_is_bit_exact() {
        let t = Tensor::from_vec(&[2, 3], vec![0.1, -2.5e-300, f64::MIN_POSITIVE, 3.7, 0.0, -0.0])
            .unwrap();
        let rec = encode_tensor("weight", &t);
        let back = decode_tensor(&rec).unwrap();
        assert_eq!(t.shape(), back.shape());
        for (a, b) in t.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn layer_round_trips() {
        let mut rng = crate::rng::stream(9, "ckpt");
        let conv = Conv1d::init(2, 3, 3, 1, 1, &mut rng);
        let rec = conv1d_record("conv", &conv);
        assert_eq!(conv1d_from_record(&rec).unwrap(), conv);

        let dense = Dense::init(4, 2, &mut rng);
        assert_eq!(dense_from_record(&dense_record("fc", &dense)).unwrap(), dense);

        let bn = BatchNorm::init(5);
        assert_eq!(batchnorm_from_record(&batchnorm_record("bn", &bn)).unwrap(), bn);
    }

    #[test]
    fn manifest_json_round_trip() {
        let mut rng = crate::rng::stream(10, "ckpt-manifest");
        let dense = Dense::init(3, 3, &mut rng);
        let manifest = Manifest::new(vec![dense_record("fc", &dense)]);
        let json = serde_json::to_string(&manifest).unwrap();
        let back: Manifest = serde_json::from_str(&json).unwrap();
        back.check_format().unwrap();
        assert_eq!(dense_from_record(&back.layers[0]).unwrap(), dense);
    }

    #[test]
    fn wrong_format_tag_is_rejected() {
        let m = Manifest { format: "ndnn-ckpt-v0".to_string(), layers: vec![] };
        assert!(m.check_format().is_err());
    }
}
