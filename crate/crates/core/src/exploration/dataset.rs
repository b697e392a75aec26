use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExplorationKind;
use crate::env::{SceneFile, SetupKind};
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::Rng;

pub const DATASET_SCHEMA_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"SMDS";
/// Normalized data spans `[-NORM_BOUND, NORM_BOUND]` per channel.
pub const NORM_BOUND: f64 = 0.8;
pub const DEFAULT_BATCH_SIZE: usize = 100;

/// One sensorimotor transition `(m_t, s_t) → (m_{t+1}, s_{t+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub m_t: Vec<f64>,
    pub s_t: Vec<f64>,
    pub m_next: Vec<f64>,
    pub s_next: Vec<f64>,
}

/// Affine map of one channel onto `[-0.8, 0.8]`, fitted from its range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelNorm {
    pub min: f64,
    pub max: f64,
}

impl ChannelNorm {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        -NORM_BOUND + 2.0 * NORM_BOUND * (x - self.min) / (self.max - self.min)
    }

    #[inline]
    pub fn invert(&self, y: f64) -> f64 {
        self.min + (y + NORM_BOUND) * (self.max - self.min) / (2.0 * NORM_BOUND)
    }

    pub fn scale(&self) -> f64 {
        2.0 * NORM_BOUND / (self.max - self.min)
    }

    pub fn offset(&self) -> f64 {
        -NORM_BOUND - self.scale() * self.min
    }
}

/// Per-channel normalization. Motor channels are shared by `m_t` and
/// `m_{t+1}` (the encoder sees both through the same weights); likewise for
/// sensory channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub motor: Vec<ChannelNorm>,
    pub sensory: Vec<ChannelNorm>,
}

impl Normalization {
    pub fn apply_motor(&self, m: &[f64]) -> Vec<f64> {
        m.iter().zip(&self.motor).map(|(&x, n)| n.apply(x)).collect()
    }

    pub fn apply_sensory(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.sensory).map(|(&x, n)| n.apply(x)).collect()
    }

    pub fn invert_motor(&self, m: &[f64]) -> Vec<f64> {
        m.iter().zip(&self.motor).map(|(&y, n)| n.invert(y)).collect()
    }

    pub fn invert_sensory(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.sensory).map(|(&y, n)| n.invert(y)).collect()
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub setup: SetupKind,
    pub exploration: ExplorationKind,
    pub seed: u64,
    /// Initial (untranslated) scene.
    pub scene: SceneFile,
    pub attempted: u64,
    pub discarded: u64,
    pub translations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    count: usize,
    motor_dim: usize,
    sensory_dim: usize,
    provenance: Provenance,
    norm: Option<Normalization>,
}

/// A flat store of transitions, `[m_t, s_t, m_next, s_next]` per record.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    motor_dim: usize,
    sensory_dim: usize,
    data: Vec<f64>,
    norm: Option<Normalization>,
    provenance: Provenance,
}

/// Column-stacked mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub m_t: Matrix,
    pub s_t: Matrix,
    pub m_next: Matrix,
    pub s_next: Matrix,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.m_t.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Dataset {
    pub fn new(motor_dim: usize, sensory_dim: usize, provenance: Provenance) -> Self {
        Self { motor_dim, sensory_dim, data: Vec::new(), norm: None, provenance }
    }

    pub fn push(&mut self, m_t: &[f64], s_t: &[f64], m_next: &[f64], s_next: &[f64]) -> Result<()> {
        if m_t.len() != self.motor_dim
            || m_next.len() != self.motor_dim
            || s_t.len() != self.sensory_dim
            || s_next.len() != self.sensory_dim
        {
            return Err(Error::Shape(format!(
                "transition dimensions do not match dataset ({} motor, {} sensory)",
                self.motor_dim, self.sensory_dim
            )));
        }
        self.data.extend_from_slice(m_t);
        self.data.extend_from_slice(s_t);
        self.data.extend_from_slice(m_next);
        self.data.extend_from_slice(s_next);
        Ok(())
    }

    pub fn record_len(&self) -> usize {
        2 * (self.motor_dim + self.sensory_dim)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.record_len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn motor_dim(&self) -> usize {
        self.motor_dim
    }

    pub fn sensory_dim(&self) -> usize {
        self.sensory_dim
    }

    pub fn norm(&self) -> Option<&Normalization> {
        self.norm.as_ref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub(crate) fn provenance_mut(&mut self) -> &mut Provenance {
        &mut self.provenance
    }

    fn record(&self, i: usize) -> &[f64] {
        let r = self.record_len();
        &self.data[i * r..(i + 1) * r]
    }

    pub fn transition(&self, i: usize) -> Transition {
        let (nm, ns) = (self.motor_dim, self.sensory_dim);
        let r = self.record(i);
        Transition {
            m_t: r[..nm].to_vec(),
            s_t: r[nm..nm + ns].to_vec(),
            m_next: r[nm + ns..2 * nm + ns].to_vec(),
            s_next: r[2 * nm + ns..].to_vec(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Transition> + '_ {
        (0..self.len()).map(move |i| self.transition(i))
    }

    /// Whether record offset `j` belongs to a motor channel, and which one.
    fn channel_of(&self, j: usize) -> (bool, usize) {
        let (nm, ns) = (self.motor_dim, self.sensory_dim);
        let j = j % (nm + ns);
        if j < nm {
            (true, j)
        } else {
            (false, j - nm)
        }
    }

    /// Fits per-channel ranges on this dataset and maps every channel onto
    /// `[-0.8, 0.8]`.
    pub fn normalize(&self) -> Result<Dataset> {
        if self.norm.is_some() {
            return Err(Error::Config("dataset is already normalized".into()));
        }
        if self.is_empty() {
            return Err(Error::Config("cannot normalize an empty dataset".into()));
        }
        let empty = ChannelNorm { min: f64::INFINITY, max: f64::NEG_INFINITY };
        let mut motor = vec![empty; self.motor_dim];
        let mut sensory = vec![empty; self.sensory_dim];
        for rec in self.data.chunks_exact(self.record_len()) {
            for (j, &x) in rec.iter().enumerate() {
                let c = match self.channel_of(j) {
                    (true, k) => &mut motor[k],
                    (false, k) => &mut sensory[k],
                };
                c.min = c.min.min(x);
                c.max = c.max.max(x);
            }
        }
        let check = |chans: &[ChannelNorm], what: &str| -> Result<()> {
            for (k, c) in chans.iter().enumerate() {
                if c.max <= c.min {
                    return Err(Error::DegenerateChannel { component: format!("{what}[{k}]") });
                }
            }
            Ok(())
        };
        check(&motor, "motor")?;
        check(&sensory, "sensory")?;
        let norm = Normalization { motor, sensory };
        let mut out = self.clone();
        let r = self.record_len();
        for (idx, x) in out.data.iter_mut().enumerate() {
            *x = match self.channel_of(idx % r) {
                (true, k) => norm.motor[k].apply(*x),
                (false, k) => norm.sensory[k].apply(*x),
            };
        }
        out.norm = Some(norm);
        Ok(out)
    }

    /// `size` transitions drawn uniformly with replacement.
    pub fn minibatch(&self, rng: &mut Rng, size: usize) -> Result<Batch> {
        if self.is_empty() {
            return Err(Error::Config("cannot draw a mini-batch from an empty dataset".into()));
        }
        let indices: Vec<usize> = (0..size).map(|_| rng.below(self.len())).collect();
        Ok(self.gather(&indices))
    }

    /// Records at the given indices, as a batch.
    pub fn gather(&self, indices: &[usize]) -> Batch {
        let (nm, ns) = (self.motor_dim, self.sensory_dim);
        let b = indices.len();
        let mut batch = Batch {
            m_t: Matrix::zeros(b, nm),
            s_t: Matrix::zeros(b, ns),
            m_next: Matrix::zeros(b, nm),
            s_next: Matrix::zeros(b, ns),
        };
        for (row, &i) in indices.iter().enumerate() {
            let r = self.record(i);
            batch.m_t.row_mut(row).copy_from_slice(&r[..nm]);
            batch.s_t.row_mut(row).copy_from_slice(&r[nm..nm + ns]);
            batch.m_next.row_mut(row).copy_from_slice(&r[nm + ns..2 * nm + ns]);
            batch.s_next.row_mut(row).copy_from_slice(&r[2 * nm + ns..]);
        }
        batch
    }

    pub fn all(&self) -> Batch {
        let idx: Vec<usize> = (0..self.len()).collect();
        self.gather(&idx)
    }

    /// Binary file: magic, header length, JSON header, packed little-endian `f64`s.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = Header {
            schema_version: DATASET_SCHEMA_VERSION,
            count: self.len(),
            motor_dim: self.motor_dim,
            sensory_dim: self.sensory_dim,
            provenance: self.provenance.clone(),
            norm: self.norm.clone(),
        };
        let header = serde_json::to_vec(&header)?;
        let write = || -> std::io::Result<()> {
            let mut w = BufWriter::new(std::fs::File::create(path)?);
            w.write_all(MAGIC)?;
            w.write_all(&(header.len() as u64).to_le_bytes())?;
            w.write_all(&header)?;
            for x in &self.data {
                w.write_all(&x.to_le_bytes())?;
            }
            w.flush()
        };
        write().map_err(Error::io_at(path))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        let bad = |reason: &str| Error::Format { path: path.to_path_buf(), reason: reason.into() };
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(Error::io_at(path))?;
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(bad("not a dataset file"));
        }
        let hlen = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
        let body = bytes.get(12..12 + hlen).ok_or_else(|| bad("truncated header"))?;
        let value: serde_json::Value = serde_json::from_slice(body)?;
        let version = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != DATASET_SCHEMA_VERSION {
            return Err(Error::Version { found: version, expected: DATASET_SCHEMA_VERSION });
        }
        let header: Header = serde_json::from_value(value)?;
        let payload = &bytes[12 + hlen..];
        let expected = header.count * 2 * (header.motor_dim + header.sensory_dim) * 8;
        if payload.len() != expected {
            return Err(bad(&format!("payload has {} bytes, expected {expected}", payload.len())));
        }
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Dataset {
            motor_dim: header.motor_dim,
            sensory_dim: header.sensory_dim,
            data,
            norm: header.norm,
            provenance: header.provenance,
        })
    }

    /// One transition per line with a header naming the channels.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        let mut names = Vec::with_capacity(self.record_len());
        for (prefix, n) in [
            ("m_t", self.motor_dim),
            ("s_t", self.sensory_dim),
            ("m_next", self.motor_dim),
            ("s_next", self.sensory_dim),
        ] {
            names.extend((0..n).map(|k| format!("{prefix}_{k}")));
        }
        writeln!(out, "{}", names.join(","))?;
        for rec in self.data.chunks_exact(self.record_len()) {
            let line: Vec<String> = rec.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}
