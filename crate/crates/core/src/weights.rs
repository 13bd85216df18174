//! Flat binary container for network weights and fixed feature grids.
//!
//! All integers are little-endian. Layout:
//!
//! ```text
//! magic     4 bytes  "TSCW"
//! version   u32      currently 1
//! kind      u32      1 = single network, 2 = plane grids, 3 = policy bundle
//! seed      u64      seed the contents were generated or trained with
//! tag_len   u32      length of the UTF-8 tag that follows (encoder id etc.)
//! tag       bytes
//! sections  u32      number of sections
//! per section:
//!   name_len u32, name bytes
//!   n_dims   u32, dims   u32 * n_dims
//!   n_meta   u32, meta   u32 * n_meta
//!   n_values u64, values f32 * n_values (row-major)
//! ```

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::nn::{Activation, Mlp};

pub const MAGIC: &[u8; 4] = b"TSCW";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Network = 1,
    Planes = 2,
    PolicyBundle = 3,
}

impl FileKind {
    fn from_u32(v: u32) -> Option<Self> {
        match v {
            1 => Some(FileKind::Network),
            2 => Some(FileKind::Planes),
            3 => Some(FileKind::PolicyBundle),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WeightsError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a weight file (bad magic)")]
    BadMagic,
    #[error("unsupported weight file version {0}")]
    Version(u32),
    #[error("malformed weight file: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub dims: Vec<u32>,
    pub meta: Vec<u32>,
    pub values: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFile {
    pub kind: FileKind,
    pub seed: u64,
    pub tag: String,
    pub sections: Vec<Section>,
}

impl WeightFile {
    pub fn new(kind: FileKind, seed: u64, tag: impl Into<String>) -> Self {
        WeightFile { kind, seed, tag: tag.into(), sections: Vec::new() }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn push_network(&mut self, name: &str, net: &Mlp) {
        self.sections.push(network_section(name, net));
    }

    pub fn network(&self, name: &str) -> Result<Mlp, WeightsError> {
        let s = self.section(name).ok_or_else(|| WeightsError::Malformed(format!("missing section {name}")))?;
        network_from_section(s)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), WeightsError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.kind as u32).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        write_bytes(&mut w, self.tag.as_bytes())?;
        w.write_all(&(self.sections.len() as u32).to_le_bytes())?;
        for s in &self.sections {
            write_bytes(&mut w, s.name.as_bytes())?;
            write_u32s(&mut w, &s.dims)?;
            write_u32s(&mut w, &s.meta)?;
            w.write_all(&(s.values.len() as u64).to_le_bytes())?;
            for v in &s.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, WeightsError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(WeightsError::BadMagic);
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(WeightsError::Version(version));
        }
        let kind_raw = read_u32(&mut r)?;
        let kind = FileKind::from_u32(kind_raw).ok_or_else(|| WeightsError::Malformed(format!("unknown kind {kind_raw}")))?;
        let seed = read_u64(&mut r)?;
        let tag = read_string(&mut r)?;
        let n_sections = read_u32(&mut r)?;
        let mut sections = Vec::with_capacity(n_sections.min(64) as usize);
        for _ in 0..n_sections {
            let name = read_string(&mut r)?;
            let dims = read_u32s(&mut r)?;
            let meta = read_u32s(&mut r)?;
            let n = read_u64(&mut r)?;
            let mut bytes = vec![0u8; 4 * n as usize];
            r.read_exact(&mut bytes)?;
            let values = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
            sections.push(Section { name, dims, meta, values });
        }
        Ok(WeightFile { kind, seed, tag, sections })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WeightsError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WeightsError> {
        let bytes = fs::read(path)?;
        Self::read_from(bytes.as_slice())
    }
}

/// Network as a section: dims are the layer sizes, meta the activation codes.
pub fn network_section(name: &str, net: &Mlp) -> Section {
    Section {
        name: name.to_string(),
        dims: net.sizes().iter().map(|&s| s as u32).collect(),
        meta: net.activations().iter().map(|a| a.code()).collect(),
        values: net.params().iter().map(|&p| p as f32).collect(),
    }
}

pub fn network_from_section(s: &Section) -> Result<Mlp, WeightsError> {
    let sizes: Vec<usize> = s.dims.iter().map(|&d| d as usize).collect();
    let acts = s
        .meta
        .iter()
        .map(|&c| Activation::from_code(c).ok_or_else(|| WeightsError::Malformed(format!("activation code {c}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut net = Mlp::zeros(&sizes, &acts).map_err(|e| WeightsError::Malformed(e.to_string()))?;
    let params: Vec<f64> = s.values.iter().map(|&v| v as f64).collect();
    net.set_params(&params).map_err(|e| WeightsError::Malformed(e.to_string()))?;
    Ok(net)
}

fn write_bytes<W: Write>(w: &mut W, bytes: &[u8]) -> io::Result<()> {
    w.write_all(&(bytes.len() as u32).to_le_bytes())?;
    w.write_all(bytes)
}

fn write_u32s<W: Write>(w: &mut W, vals: &[u32]) -> io::Result<()> {
    w.write_all(&(vals.len() as u32).to_le_bytes())?;
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32s<R: Read>(r: &mut R) -> Result<Vec<u32>, WeightsError> {
    let n = read_u32(r)?;
    if n > 1 << 20 {
        return Err(WeightsError::Malformed(format!("implausible list length {n}")));
    }
    (0..n).map(|_| read_u32(r).map_err(WeightsError::from)).collect()
}

fn read_string<R: Read>(r: &mut R) -> Result<String, WeightsError> {
    let n = read_u32(r)?;
    if n > 1 << 16 {
        return Err(WeightsError::Malformed(format!("implausible string length {n}")));
    }
    let mut b = vec![0u8; n as usize];
    r.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|e| WeightsError::Malformed(e.to_string()))
}
