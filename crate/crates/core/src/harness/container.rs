//! On-disk network container.
//!
//! A directory holding `manifest.json` and one raw file per tensor:
//! little-endian `f64` pairs `(re, im)` in row-major order. MPS Schmidt
//! vectors are stored as complex tensors with zero imaginary part.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Array3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::ttn::Ttn;

pub const FORMAT_VERSION: u32 = 1;
const DTYPE: &str = "c128";

#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    Mps(Mps),
    Ttn(Ttn),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub file: String,
    pub shape: Vec<usize>,
    pub axis_order: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub phys_dim: usize,
    /// MPS: extents of bonds `0..=L`. TTN: top-leg extent of every node,
    /// layer by layer from the bottom.
    pub bond_dims: Vec<usize>,
    pub dtype: String,
    pub tensors: BTreeMap<String, TensorEntry>,
}

fn encode<'a, I: IntoIterator<Item = &'a C64>>(values: I) -> Vec<u8> {
    let mut out = Vec::new();
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8], name: &str, expected: usize) -> Result<Vec<C64>> {
    if bytes.len() != expected * 16 {
        return Err(Error::Load(format!("tensor {name}: {} bytes on disk, shape needs {}", bytes.len(), expected * 16)));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect())
}

struct Writer<'a> {
    dir: &'a Path,
    tensors: BTreeMap<String, TensorEntry>,
}

impl Writer<'_> {
    fn put<'b, I: IntoIterator<Item = &'b C64>>(&mut self, name: String, shape: Vec<usize>, axis_order: &str, values: I) -> Result<()> {
        let file = format!("{name}.bin");
        fs::write(self.dir.join(&file), encode(values))?;
        self.tensors.insert(name, TensorEntry { file, shape, axis_order: axis_order.into() });
        Ok(())
    }
}

/// Writes `network` into directory `path`, creating it if needed.
pub fn save_network(path: &Path, network: &Network) -> Result<()> {
    fs::create_dir_all(path)?;
    let mut w = Writer { dir: path, tensors: BTreeMap::new() };
    let manifest = match network {
        Network::Mps(m) => {
            for (n, g) in m.gammas().iter().enumerate() {
                w.put(format!("gamma_{n:05}"), g.shape().to_vec(), "left,phys,right", g.as_standard_layout().iter())?;
            }
            for (n, s) in m.schmidt_vectors().iter().enumerate() {
                let z: Vec<C64> = s.iter().map(|&x| C64::new(x, 0.0)).collect();
                w.put(format!("schmidt_{n:05}"), vec![s.len()], "bond", z.iter())?;
            }
            Manifest {
                format_version: FORMAT_VERSION,
                kind: "mps".into(),
                length: Some(m.len()),
                depth: None,
                phys_dim: m.phys_dim(),
                bond_dims: m.bond_dims(),
                dtype: DTYPE.into(),
                tensors: w.tensors,
            }
        }
        Network::Ttn(t) => {
            let mut bond_dims = Vec::new();
            for (i, layer) in t.layers().iter().enumerate() {
                for (p, node) in layer.iter().enumerate() {
                    bond_dims.push(node.dim().0);
                    w.put(format!("w_{:02}_{p:05}", i + 1), node.shape().to_vec(), "top,left_child,right_child", node.as_standard_layout().iter())?;
                }
            }
            w.put("top".into(), t.top().shape().to_vec(), "left,right", t.top().as_standard_layout().iter())?;
            Manifest {
                format_version: FORMAT_VERSION,
                kind: "ttn".into(),
                length: None,
                depth: Some(t.depth()),
                phys_dim: t.phys_dim(),
                bond_dims,
                dtype: DTYPE.into(),
                tensors: w.tensors,
            }
        }
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(path.join("manifest.json"), text)?;
    Ok(())
}

struct Reader<'a> {
    dir: &'a Path,
    manifest: &'a Manifest,
}

impl Reader<'_> {
    fn get(&self, name: &str, rank: usize, axis_order: &str) -> Result<(Vec<usize>, Vec<C64>)> {
        let entry = self.manifest.tensors.get(name).ok_or_else(|| Error::Load(format!("tensor table lacks {name}")))?;
        if entry.shape.len() != rank {
            return Err(Error::Load(format!("tensor {name} has rank {}, expected {rank}", entry.shape.len())));
        }
        if entry.axis_order != axis_order {
            return Err(Error::Load(format!("tensor {name} has axis order {:?}, expected {axis_order:?}", entry.axis_order)));
        }
        if entry.file.contains(['/', '\\']) || entry.file.starts_with('.') {
            return Err(Error::Load(format!("tensor {name} names file {:?} outside the container", entry.file)));
        }
        let count = entry.shape.iter().try_fold(1usize, |a, &b| a.checked_mul(b)).ok_or_else(|| Error::Load(format!("tensor {name} shape overflows")))?;
        let bytes = fs::read(self.dir.join(&entry.file)).map_err(|e| Error::Load(format!("tensor {name} ({}): {e}", entry.file)))?;
        Ok((entry.shape.clone(), decode(&bytes, name, count)?))
    }

    fn get3(&self, name: &str, axis_order: &str) -> Result<Array3<C64>> {
        let (shape, data) = self.get(name, 3, axis_order)?;
        Array3::from_shape_vec((shape[0], shape[1], shape[2]), data).map_err(|e| Error::Load(format!("tensor {name}: {e}")))
    }
}

fn load_error(e: Error) -> Error {
    match e {
        Error::Load(_) | Error::Io(_) => e,
        other => Error::Load(other.to_string()),
    }
}

/// Reads a container written by [`save_network`]. The MPS canonical flag is
/// recomputed from the loaded tensors.
pub fn load_network(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path.join("manifest.json")).map_err(|e| Error::Load(format!("manifest.json: {e}")))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Load(format!("corrupt manifest: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Load(format!("format version {} is not supported (expected {FORMAT_VERSION})", manifest.format_version)));
    }
    if manifest.dtype != DTYPE {
        return Err(Error::Load(format!("dtype {:?} is not supported", manifest.dtype)));
    }
    let r = Reader { dir: path, manifest: &manifest };
    match manifest.kind.as_str() {
        "mps" => {
            let l = manifest.length.ok_or_else(|| Error::Load("mps manifest lacks length".into()))?;
            if manifest.tensors.len() != 2 * l + 1 {
                return Err(Error::Load(format!("mps of length {l} needs {} tensors, table has {}", 2 * l + 1, manifest.tensors.len())));
            }
            let gammas = (0..l).map(|n| r.get3(&format!("gamma_{n:05}"), "left,phys,right")).collect::<Result<Vec<_>>>()?;
            let mut schmidt = Vec::with_capacity(l + 1);
            for n in 0..=l {
                let name = format!("schmidt_{n:05}");
                let (_, data) = r.get(&name, 1, "bond")?;
                if data.iter().any(|z| z.im != 0.0) {
                    return Err(Error::Load(format!("tensor {name} has a nonzero imaginary part")));
                }
                schmidt.push(data.iter().map(|z| z.re).collect::<Array1<f64>>());
            }
            let m = Mps::from_vidal(gammas, schmidt).map_err(load_error)?;
            if m.phys_dim() != manifest.phys_dim || m.bond_dims() != manifest.bond_dims {
                return Err(Error::Load("manifest phys_dim or bond_dims disagree with the tensors".into()));
            }
            Ok(Network::Mps(m))
        }
        "ttn" => {
            let depth = manifest.depth.ok_or_else(|| Error::Load("ttn manifest lacks depth".into()))?;
            if !(2..=30).contains(&depth) {
                return Err(Error::Load(format!("depth {depth} out of range")));
            }
            let mut layers = Vec::with_capacity(depth - 1);
            for t in 1..depth {
                let nodes = 1usize << (depth - t);
                layers.push((0..nodes).map(|p| r.get3(&format!("w_{t:02}_{p:05}"), "top,left_child,right_child")).collect::<Result<Vec<_>>>()?);
            }
            let (shape, data) = r.get("top", 2, "left,right")?;
            let top = Array2::from_shape_vec((shape[0], shape[1]), data).map_err(|e| Error::Load(format!("tensor top: {e}")))?;
            let expected = layers.iter().map(|l| l.len()).sum::<usize>() + 1;
            if manifest.tensors.len() != expected {
                return Err(Error::Load(format!("ttn of depth {depth} needs {expected} tensors, table has {}", manifest.tensors.len())));
            }
            let t = Ttn::new(manifest.phys_dim, layers, top).map_err(load_error)?;
            let dims: Vec<usize> = t.layers().iter().flatten().map(|w| w.dim().0).collect();
            if dims != manifest.bond_dims {
                return Err(Error::Load("manifest bond_dims disagree with the tensors".into()));
            }
            Ok(Network::Ttn(t))
        }
        other => Err(Error::Load(format!("unknown network kind {other:?}"))),
    }
}
