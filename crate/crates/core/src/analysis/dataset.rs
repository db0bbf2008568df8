//! Quadrature sample sets: CSV and raw binary ingestion.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpState {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Signal,
    Idler,
    Single,
}

impl PumpState {
    fn code(self) -> f64 {
        match self {
            PumpState::Off => 0.0,
            PumpState::On => 1.0,
        }
    }

    fn from_code(c: f64) -> Result<Self> {
        match c {
            x if x == 0.0 => Ok(PumpState::Off),
            x if x == 1.0 => Ok(PumpState::On),
            _ => Err(Error::Parse(format!("bad pump_state code {c}"))),
        }
    }
}

impl Channel {
    fn code(self) -> f64 {
        match self {
            Channel::Signal => 0.0,
            Channel::Idler => 1.0,
            Channel::Single => 2.0,
        }
    }

    fn from_code(c: f64) -> Result<Self> {
        match c {
            x if x == 0.0 => Ok(Channel::Signal),
            x if x == 1.0 => Ok(Channel::Idler),
            x if x == 2.0 => Ok(Channel::Single),
            _ => Err(Error::Parse(format!("bad channel code {c}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub i_mv: f64,
    pub q_mv: f64,
    pub pump_state: PumpState,
    pub channel: Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    #[serde(default)]
    pub frequency_hz: f64,
    #[serde(default)]
    pub demod_bandwidth_hz: f64,
}

/// Sidecar written next to a raw `.f64` record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinarySidecar {
    pub columns: Vec<String>,
    pub records: usize,
    #[serde(flatten)]
    pub meta: DatasetMeta,
}

const COLUMNS: [&str; 4] = ["i_mv", "q_mv", "pump_state", "channel"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadratureDataset {
    pub samples: Vec<Sample>,
    pub meta: DatasetMeta,
}

/// I and Q columns of one (pump state, channel) cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cell {
    pub i: Vec<f64>,
    pub q: Vec<f64>,
}

impl Cell {
    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }
}

impl QuadratureDataset {
    pub fn new(samples: Vec<Sample>, meta: DatasetMeta) -> Result<Self> {
        let d = Self { samples, meta };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((k, _)) = self
            .samples
            .iter()
            .enumerate()
            .find(|(_, s)| !s.i_mv.is_finite() || !s.q_mv.is_finite())
        {
            return Err(Error::InvalidParameter(format!("non-finite sample at row {k}")));
        }
        Ok(())
    }

    pub fn cell(&self, state: PumpState, channel: Channel) -> Cell {
        let mut c = Cell::default();
        for s in self.samples.iter().filter(|s| s.pump_state == state && s.channel == channel) {
            c.i.push(s.i_mv);
            c.q.push(s.q_mv);
        }
        c
    }

    pub fn has_channel(&self, channel: Channel) -> bool {
        self.samples.iter().any(|s| s.channel == channel)
    }

    /// Multiply every voltage by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|x| Sample { i_mv: s * x.i_mv, q_mv: s * x.q_mv, ..*x })
            .collect();
        Self { samples, meta: self.meta }
    }

    pub fn read_csv<R: Read>(reader: R, meta: DatasetMeta) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != COLUMNS {
            return Err(Error::Parse(format!("expected header {}, got {}", COLUMNS.join(","), headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let s: Sample = row.map_err(|e| Error::Parse(e.to_string()))?;
            samples.push(s);
        }
        Self::new(samples, meta)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.samples {
            w.serialize(s).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_csv(path: &Path, meta: DatasetMeta) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, meta)
    }

    /// Little-endian f64 records (i_mv, q_mv, pump_state, channel); codes off=0/on=1 and
    /// signal=0/idler=1/single=2.
    pub fn read_binary(bytes: &[u8], sidecar: &BinarySidecar) -> Result<Self> {
        if sidecar.columns.iter().map(String::as_str).ne(COLUMNS) {
            return Err(Error::Parse(format!("sidecar columns must be {}", COLUMNS.join(","))));
        }
        let rec = 4 * 8;
        if bytes.len() != sidecar.records * rec {
            return Err(Error::Parse(format!("expected {} bytes for {} records, got {}", sidecar.records * rec, sidecar.records, bytes.len())));
        }
        let mut samples = Vec::with_capacity(sidecar.records);
        for chunk in bytes.chunks_exact(rec) {
            let v: Vec<f64> = chunk.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
            samples.push(Sample {
                i_mv: v[0],
                q_mv: v[1],
                pump_state: PumpState::from_code(v[2])?,
                channel: Channel::from_code(v[3])?,
            });
        }
        Self::new(samples, sidecar.meta)
    }

    pub fn to_binary(&self) -> (Vec<u8>, BinarySidecar) {
        let mut bytes = Vec::with_capacity(self.samples.len() * 32);
        for s in &self.samples {
            for v in [s.i_mv, s.q_mv, s.pump_state.code(), s.channel.code()] {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        let sidecar = BinarySidecar {
            columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
            records: self.samples.len(),
            meta: self.meta,
        };
        (bytes, sidecar)
    }

    /// Reads `path` and its JSON sidecar `path.json`.
    pub fn load_binary(path: &Path) -> Result<Self> {
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        let text = std::fs::read_to_string(&side)?;
        let sidecar: BinarySidecar = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::read_binary(&std::fs::read(path)?, &sidecar)
    }
}
