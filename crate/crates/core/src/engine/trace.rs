//! Density traces and their CSV form.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const TRACE_HEADER: [&str; 6] = ["t", "burned", "total", "density", "mode", "ci_halfwidth"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Burned {
    Exact(u64),
    Sampled { estimate: f64, ci_halfwidth: f64 },
}

impl Burned {
    pub fn value(&self) -> f64 {
        match *self {
            Burned::Exact(n) => n as f64,
            Burned::Sampled { estimate, .. } => estimate,
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match *self {
            Burned::Exact(n) => Some(n),
            Burned::Sampled { .. } => None,
        }
    }

    pub fn ci_halfwidth(&self) -> Option<f64> {
        match *self {
            Burned::Exact(_) => None,
            Burned::Sampled { ci_halfwidth, .. } => Some(ci_halfwidth),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub t: u64,
    pub burned: Burned,
    /// `(2 f(t) + 1)^2`.
    pub total: u64,
}

impl TraceEntry {
    pub fn density(&self) -> f64 {
        self.burned.value() / self.total as f64
    }

    /// Half-width of the density confidence interval (zero when exact).
    pub fn density_ci(&self) -> f64 {
        self.burned.ci_halfwidth().unwrap_or(0.0) / self.total as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub growth: String,
    pub strategy: String,
    pub backend: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    metadata: TraceMetadata,
    entries: Vec<TraceEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
}

impl DensityTrace {
    pub fn new(metadata: TraceMetadata) -> Self {
        DensityTrace { metadata, entries: Vec::new() }
    }

    /// Builds a trace from entries, checking they are strictly increasing in `t`.
    pub fn from_entries(metadata: TraceMetadata, entries: Vec<TraceEntry>) -> Self {
        let mut tr = Self::new(metadata);
        for e in entries {
            tr.push(e.t, e.burned, e.total);
        }
        tr
    }

    /// Panics if `t` does not exceed the last recorded turn.
    pub fn push(&mut self, t: u64, burned: Burned, total: u64) {
        if let Some(last) = self.entries.last() {
            assert!(t > last.t, "trace turns must increase ({t} after {})", last.t);
        }
        self.entries.push(TraceEntry { t, burned, total });
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn metadata(&self) -> &TraceMetadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut TraceMetadata {
        &mut self.metadata
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, t: u64) -> Option<&TraceEntry> {
        self.entries.binary_search_by_key(&t, |e| e.t).ok().map(|i| &self.entries[i])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), TraceError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRACE_HEADER)?;
        for e in &self.entries {
            let (burned, mode, ci) = match e.burned {
                Burned::Exact(n) => (n.to_string(), "exact", String::new()),
                Burned::Sampled { estimate, ci_halfwidth } => (estimate.to_string(), "sampled", ci_halfwidth.to_string()),
            };
            out.write_record([e.t.to_string(), burned, e.total.to_string(), e.density().to_string(), mode.into(), ci])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the CSV form. Metadata is not part of the CSV and comes back empty.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, TraceError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != TRACE_HEADER {
            return Err(TraceError::Header(header));
        }
        let mut trace = DensityTrace::default();
        for (k, row) in rdr.records().enumerate() {
            let row = row?;
            let line = k as u64 + 2;
            let bad = |reason: &str| TraceError::Row { line, reason: reason.to_string() };
            let t: u64 = row[0].parse().map_err(|_| bad("t"))?;
            let total: u64 = row[2].parse().map_err(|_| bad("total"))?;
            let burned = match &row[4] {
                "exact" => Burned::Exact(row[1].parse().map_err(|_| bad("burned"))?),
                "sampled" => Burned::Sampled {
                    estimate: row[1].parse().map_err(|_| bad("burned"))?,
                    ci_halfwidth: row[5].parse().map_err(|_| bad("ci_halfwidth"))?,
                },
                _ => return Err(bad("mode")),
            };
            if trace.entries.last().is_some_and(|e| e.t >= t) {
                return Err(bad("turns must increase"));
            }
            trace.entries.push(TraceEntry { t, burned, total });
        }
        Ok(trace)
    }
}
