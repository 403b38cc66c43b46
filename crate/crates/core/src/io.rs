//! Output files: series CSV, field snapshots and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certifier::Disposition;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::fields::{EnergyBreakdown, FluidState, Grid, ScalarField, VectorField};
use crate::solver::{Diagnostics, RunStatus, TimeSeries};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const MOMENTUM_COLUMNS: [&str; 3] = ["Px", "Py", "Pz"];

/// Column names of a series file for dimension `n`.
pub fn series_header(n: usize) -> Vec<&'static str> {
    let mut h = vec!["t", "m"];
    h.extend_from_slice(&MOMENTUM_COLUMNS[..n]);
    h.extend_from_slice(&[
        "E_k",
        "E_i",
        "E_m",
        "E_total",
        "D_q",
        "support_radius",
        "clamps",
        "curlH2",
        "divH_rel",
    ]);
    h
}

// 17 significant digits: enough to read back the same f64.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_series<W: Write>(series: &TimeSeries, n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(series_header(n))?;
    for k in 0..series.len() {
        let e = &series.breakdowns[k];
        let d = &series.diagnostics[k];
        if e.p.len() != n {
            return Err(Error::Dimension(format!("momentum has {} components, expected {n}", e.p.len())));
        }
        let mut row = vec![real(series.times[k]), real(e.m)];
        row.extend(e.p.iter().map(|&p| real(p)));
        row.extend([e.e_k, e.e_i, e.e_m, e.total, e.d_q, d.support_radius].map(real));
        row.push(d.clamps.to_string());
        row.extend([d.curl_h2, d.div_h_rel].map(real));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("series", e))?;
    Ok(())
}

pub fn write_series_file(series: &TimeSeries, n: usize, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_series(series, n, BufWriter::new(file))
}

/// Reads a series written by [`write_series`]. The dimension is taken from
/// the momentum columns; the last two diagnostic columns are optional.
pub fn read_series<R: Read>(input: R) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| Error::Mismatch(format!("series is missing column `{name}`")));
    let n = MOMENTUM_COLUMNS.iter().take_while(|c| col(c).is_some()).count();
    if n == 0 {
        return Err(Error::Mismatch("series has no momentum columns".into()));
    }
    let idx_t = need("t")?;
    let idx_m = need("m")?;
    let idx_p: Vec<usize> = MOMENTUM_COLUMNS[..n].iter().map(|c| need(c)).collect::<Result<_>>()?;
    let idx_ek = need("E_k")?;
    let idx_ei = need("E_i")?;
    let idx_em = need("E_m")?;
    let idx_total = need("E_total")?;
    let idx_dq = need("D_q")?;
    let idx_support = need("support_radius")?;
    let idx_clamps = need("clamps")?;
    let idx_curl = col("curlH2");
    let idx_div = col("divH_rel");

    let mut series = TimeSeries::default();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Mismatch(format!("bad value in row {} column {}", line + 1, i + 1)))
        };
        let opt = |i: Option<usize>| -> Result<f64> { i.map(field).unwrap_or(Ok(0.0)) };
        let clamps = record
            .get(idx_clamps)
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Mismatch(format!("bad clamp count in row {}", line + 1)))?;
        let e = EnergyBreakdown {
            m: field(idx_m)?,
            p: idx_p.iter().map(|&i| field(i)).collect::<Result<_>>()?,
            e_k: field(idx_ek)?,
            e_i: field(idx_ei)?,
            e_m: field(idx_em)?,
            total: field(idx_total)?,
            d_q: field(idx_dq)?,
        };
        let d = Diagnostics {
            support_radius: field(idx_support)?,
            clamps,
            curl_h2: opt(idx_curl)?,
            div_h_rel: opt(idx_div)?,
        };
        series.push(field(idx_t)?, e, d);
    }
    Ok(series)
}

pub fn read_series_file(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_series(file)
}

/// JSON header describing a snapshot's binary payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub cells: Vec<usize>,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub components: Vec<String>,
    pub time: f64,
    pub layout: String,
    /// Name of the payload file, relative to the header.
    pub data: String,
}

pub const SNAPSHOT_LAYOUT: &str = "f64 little-endian; cells in row-major order (axis 0 slowest, last axis fastest); \
     within a cell the components in the listed order";

fn component_names(state: &FluidState) -> Vec<String> {
    let axes = ["x", "y", "z"];
    let n = state.u.ncomp();
    let mut names = vec!["rho".to_string()];
    names.extend(axes[..n].iter().map(|a| format!("u_{a}")));
    if let Some(h) = &state.h {
        names.extend(axes[..h.ncomp()].iter().map(|a| format!("H_{a}")));
    }
    names
}

fn columns(state: &FluidState) -> Vec<&[f64]> {
    let mut cols: Vec<&[f64]> = vec![&state.rho.values];
    cols.extend(state.u.comps.iter().map(|c| c.as_slice()));
    if let Some(h) = &state.h {
        cols.extend(h.comps.iter().map(|c| c.as_slice()));
    }
    cols
}

/// Writes `<stem>.json` and `<stem>.bin` into `dir` and returns both paths.
pub fn write_snapshot(state: &FluidState, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let grid = state.grid();
    let bin_name = format!("{stem}.bin");
    let header = SnapshotHeader {
        n: grid.n(),
        cells: grid.cells()[..grid.n()].to_vec(),
        half_width: grid.half_width(),
        components: component_names(state),
        time: state.time,
        layout: SNAPSHOT_LAYOUT.to_string(),
        data: bin_name.clone(),
    };
    let cols = columns(state);
    let mut bytes = Vec::with_capacity(grid.len() * cols.len() * 8);
    for i in 0..grid.len() {
        for c in &cols {
            bytes.extend_from_slice(&c[i].to_le_bytes());
        }
    }
    let bin_path = dir.join(&bin_name);
    std::fs::write(&bin_path, bytes).map_err(|e| Error::io(&bin_path, e))?;
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, serde_json::to_string_pretty(&header)? + "\n").map_err(|e| Error::io(&json_path, e))?;
    Ok((json_path, bin_path))
}

/// Reads a snapshot back from its header file.
pub fn read_snapshot(header_path: &Path) -> Result<FluidState> {
    let text = std::fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: SnapshotHeader = serde_json::from_str(&text)?;
    let grid = Grid::new(header.n, &header.cells, header.half_width)?;
    let bin_path = header_path.with_file_name(&header.data);
    let bytes = std::fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    let ncomp = header.components.len();
    if bytes.len() != grid.len() * ncomp * 8 {
        return Err(Error::Mismatch(format!(
            "{} holds {} bytes, header needs {}",
            bin_path.display(),
            bytes.len(),
            grid.len() * ncomp * 8
        )));
    }
    let n = header.n;
    let has_h = match ncomp {
        c if c == 1 + n => false,
        c if c == 1 + 2 * n => true,
        c => return Err(Error::Mismatch(format!("unexpected component count {c}"))),
    };
    let mut cols = vec![Vec::with_capacity(grid.len()); ncomp];
    for (k, chunk) in bytes.chunks_exact(8).enumerate() {
        cols[k % ncomp].push(f64::from_le_bytes(chunk.try_into().expect("8-byte chunk")));
    }
    let mut it = cols.into_iter();
    let rho = ScalarField::from_values(grid, it.next().expect("density column"))?;
    let u = VectorField {
        grid,
        comps: it.by_ref().take(n).collect(),
    };
    let h = has_h.then(|| VectorField {
        grid,
        comps: it.collect(),
    });
    Ok(FluidState {
        rho,
        u,
        h,
        time: header.time,
    })
}

/// Record of one `simulate` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Canonical JSON of the config with defaults filled.
    pub config: serde_json::Value,
    pub config_hash: String,
    pub files: Vec<String>,
    pub duration_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<RunStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disposition: Option<Disposition>,
    pub steps: usize,
    pub clamps: usize,
}

impl RunManifest {
    pub fn new(config: &SimConfig) -> Result<Self> {
        Ok(RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            config: serde_json::from_str(&config.canonical_json())?,
            config_hash: config.content_hash(),
            files: Vec::new(),
            duration_seconds: 0.0,
            status: None,
            disposition: None,
            steps: 0,
            clamps: 0,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
