//! Named-tensor weight files.
//!
//! A weight file is JSON of the form
//! `{"tensors": [{"name": "...", "shape": [..], "values": [..]}]}` with
//! row-major values. Convolutions are stored as `<prefix>.weight` with shape
//! `[out, in, kh, kw]` and `<prefix>.bias` with shape `[out]`; dense layers
//! as `[out, in]` and `[out]`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::attention::{
    Dense, IsamParams, LevelConfig, LevelParams, MemParams, MlpParams, MotionParams,
    SourceAttentionParams,
};
use super::tensor::ConvParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    tensors: BTreeMap<String, NamedTensor>,
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    tensors: Vec<NamedTensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn insert(&mut self, name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if shape.iter().product::<usize>() != values.len() {
            return Err(Error::Params(format!(
                "{name}: shape {shape:?} holds {} values, got {}",
                shape.iter().product::<usize>(),
                values.len()
            )));
        }
        self.tensors
            .insert(name.clone(), NamedTensor { name, shape, values });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&NamedTensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::Params(format!("missing tensor {name}")))
    }

    pub fn insert_conv(&mut self, prefix: &str, conv: &ConvParams) -> Result<()> {
        self.insert(
            format!("{prefix}.weight"),
            vec![conv.out_channels, conv.in_channels, conv.kernel_h, conv.kernel_w],
            conv.weight.clone(),
        )?;
        self.insert(format!("{prefix}.bias"), vec![conv.out_channels], conv.bias.clone())
    }

    pub fn conv(&self, prefix: &str) -> Result<ConvParams> {
        let w = self.get(&format!("{prefix}.weight"))?;
        let b = self.get(&format!("{prefix}.bias"))?;
        let [o, i, kh, kw] = w.shape[..] else {
            return Err(Error::Params(format!("{prefix}.weight is not 4-d")));
        };
        ConvParams::new(o, i, kh, kw, w.values.clone(), b.values.clone())
    }

    pub fn insert_dense(&mut self, prefix: &str, dense: &Dense) -> Result<()> {
        self.insert(
            format!("{prefix}.weight"),
            vec![dense.out_dim, dense.in_dim],
            dense.weight.clone(),
        )?;
        self.insert(format!("{prefix}.bias"), vec![dense.out_dim], dense.bias.clone())
    }

    pub fn dense(&self, prefix: &str) -> Result<Dense> {
        let w = self.get(&format!("{prefix}.weight"))?;
        let b = self.get(&format!("{prefix}.bias"))?;
        let [o, i] = w.shape[..] else {
            return Err(Error::Params(format!("{prefix}.weight is not 2-d")));
        };
        Dense::new(o, i, w.values.clone(), b.values.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = StoreFile {
            tensors: self.tensors.values().cloned().collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StoreFile = serde_json::from_str(text)?;
        let mut store = Self::new();
        for t in file.tensors {
            store.insert(t.name, t.shape, t.values)?;
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

const SOURCES: [&str; 3] = ["rgb", "depth", "saliency"];

impl LevelParams {
    pub fn to_store(&self) -> Result<ParamStore> {
        let mut s = ParamStore::new();
        for (name, src) in SOURCES.iter().zip([&self.isam.rgb, &self.isam.depth, &self.isam.saliency]) {
            s.insert_conv(&format!("isam.{name}.correlate"), &src.correlate)?;
            s.insert_conv(&format!("isam.{name}.squeeze"), &src.squeeze)?;
            s.insert_conv(&format!("isam.{name}.attend"), &src.attend)?;
            s.insert_conv(&format!("isam.{name}.enhance"), &src.enhance)?;
        }
        s.insert_dense("mem.mlp.fc1", &self.mem.channel_mlp.fc1)?;
        s.insert_dense("mem.mlp.fc2", &self.mem.channel_mlp.fc2)?;
        s.insert_conv("mem.spatial", &self.mem.spatial)?;
        s.insert_conv("mem.motion", &self.mem.gate.motion)?;
        s.insert_conv("mem.static_out", &self.mem.gate.static_out)?;
        s.insert_conv("mem.flow_out", &self.mem.gate.flow_out)?;
        s.insert_conv("fpm.common", &self.common)?;
        s.insert_conv("fpm.exclusive", &self.exclusive)?;
        Ok(s)
    }

    /// Rebuilds parameters from a store; pooling scales and the MLP output
    /// flag come from `cfg`, which is not part of the weight file.
    pub fn from_store(store: &ParamStore, cfg: &LevelConfig) -> Result<Self> {
        let source = |name: &str| -> Result<SourceAttentionParams> {
            Ok(SourceAttentionParams {
                correlate: store.conv(&format!("isam.{name}.correlate"))?,
                squeeze: store.conv(&format!("isam.{name}.squeeze"))?,
                attend: store.conv(&format!("isam.{name}.attend"))?,
                enhance: store.conv(&format!("isam.{name}.enhance"))?,
            })
        };
        Ok(Self {
            isam: IsamParams {
                rgb: source("rgb")?,
                depth: source("depth")?,
                saliency: source("saliency")?,
                scales: cfg.scales.clone(),
            },
            mem: MemParams {
                channel_mlp: MlpParams::new(
                    store.dense("mem.mlp.fc1")?,
                    store.dense("mem.mlp.fc2")?,
                    cfg.channel_sigmoid,
                )?,
                spatial: store.conv("mem.spatial")?,
                gate: MotionParams {
                    motion: store.conv("mem.motion")?,
                    static_out: store.conv("mem.static_out")?,
                    flow_out: store.conv("mem.flow_out")?,
                },
            },
            common: store.conv("fpm.common")?,
            exclusive: store.conv("fpm.exclusive")?,
        })
    }
}
