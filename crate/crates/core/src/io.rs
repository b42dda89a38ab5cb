//! Chart files, report serialization and atomic artifact writes.
//!
//! A chart file is a JSON manifest next to one data file per chart. Data
//! files hold IEEE-754 little-endian float64 in row-major node order with m
//! values per node, or CSV with a header `x1,...,xm` when the file name ends
//! in `.csv`.

use crate::chart::{Atlas, ChartGrid};
use crate::error::{Result, WkitError};
use crate::grid::{Axis, Grid};
use crate::shapes::ShapeSpec;
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};
use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Version of the manifest and report layouts.
pub const FORMAT_VERSION: u32 = 1;

/// One chart entry of a manifest.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct ChartEntry {
    /// Nodes per axis.
    pub dims: Vec<usize>,
    /// Parameter interval [lo, hi] per axis.
    pub rect: Vec<[f64; 2]>,
    pub periodic: Vec<bool>,
    /// Data file relative to the manifest.
    pub data_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_file: Option<String>,
    /// Lattice translation per axis for graphs over a torus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_shift: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub m: usize,
    pub n: usize,
    pub charts: Vec<ChartEntry>,
    pub closed: bool,
    /// Generator parameters when the atlas came from `gen`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeSpec>,
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn encode_f64_le(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_f64_le(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(WkitError::Format(format!(
            "binary data length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// CSV rows of `m` values per node. Rust prints the shortest decimal that
/// parses back to the same bits, so the text form is also exact.
pub fn encode_csv(values: &[f64], m: usize) -> String {
    let header: Vec<String> = (1..=m).map(|a| format!("x{a}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in values.chunks(m) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str, m: usize) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.split(',').count() != m {
        return Err(WkitError::Format(format!(
            "CSV header `{header}` does not have {m} columns"
        )));
    }
    let mut out = Vec::new();
    for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != m {
            return Err(WkitError::Format(format!(
                "CSV row {} has {} columns",
                row + 1,
                cells.len()
            )));
        }
        for c in cells {
            out.push(
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| WkitError::Format(format!("CSV row {}: {e}", row + 1)))?,
            );
        }
    }
    Ok(out)
}

fn write_values(path: &Path, values: &[f64], m: usize) -> Result<()> {
    if is_csv(path) {
        atomic_write(path, encode_csv(values, m).as_bytes())
    } else {
        atomic_write(path, &encode_f64_le(values))
    }
}

/// Read error carrying the offending path.
fn at(path: &Path) -> impl FnOnce(io::Error) -> io::Error + '_ {
    move |e| io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

fn read_values(path: &Path, m: usize) -> Result<Vec<f64>> {
    if is_csv(path) {
        decode_csv(&fs::read_to_string(path).map_err(at(path))?, m)
    } else {
        decode_f64_le(&fs::read(path).map_err(at(path))?)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// `dir/s.chart.json` becomes (`dir`, `s.chart`).
fn split_manifest_path(path: &Path) -> (PathBuf, String) {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("atlas");
    let stem = name.strip_suffix(".json").unwrap_or(name).to_string();
    (dir, stem)
}

/// Writes the atlas as a manifest at `path` plus its data files.
pub fn save_atlas(
    path: &Path,
    atlas: &Atlas,
    shape: Option<&ShapeSpec>,
    csv: bool,
) -> Result<Manifest> {
    let (dir, stem) = split_manifest_path(path);
    let ext = if csv { "csv" } else { "f64" };
    let mut charts = Vec::with_capacity(atlas.charts.len());
    for (k, chart) in atlas.charts.iter().enumerate() {
        let data_file = format!("{stem}.{k}.{ext}");
        write_values(&dir.join(&data_file), &chart.interleaved(), chart.m)?;
        let weight_file = match &chart.weight {
            Some(w) => {
                let name = format!("{stem}.{k}.weight.{ext}");
                write_values(&dir.join(&name), w, 1)?;
                Some(name)
            }
            None => None,
        };
        let period_shift = chart.has_period_shift().then(|| chart.period_shift.clone());
        charts.push(ChartEntry {
            dims: chart.grid.axes.iter().map(|a| a.len).collect(),
            rect: chart.grid.axes.iter().map(|a| [a.lo, a.hi]).collect(),
            periodic: chart.grid.axes.iter().map(|a| a.periodic).collect(),
            data_file,
            weight_file,
            period_shift,
        });
    }
    let manifest = Manifest {
        version: FORMAT_VERSION,
        m: atlas.m,
        n: atlas.n,
        charts,
        closed: atlas.closed,
        shape: shape.cloned(),
    };
    atomic_write(path, to_json_string(&manifest)?.as_bytes())?;
    Ok(manifest)
}

/// Reads a manifest and its data files.
pub fn load_atlas(path: &Path) -> Result<(Atlas, Manifest)> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path).map_err(at(path))?)?;
    if manifest.version != FORMAT_VERSION {
        return Err(WkitError::Format(format!(
            "unsupported manifest version {}",
            manifest.version
        )));
    }
    if manifest.charts.is_empty() {
        return Err(WkitError::Format("manifest lists no charts".into()));
    }
    let (dir, _) = split_manifest_path(path);
    let mut charts = Vec::with_capacity(manifest.charts.len());
    for (k, e) in manifest.charts.iter().enumerate() {
        let n = e.dims.len();
        if n != manifest.n || e.rect.len() != n || e.periodic.len() != n {
            return Err(WkitError::Format(format!(
                "chart {k}: axis lists disagree with n = {}",
                manifest.n
            )));
        }
        let axes = (0..n)
            .map(|i| Axis::new(e.dims[i], e.rect[i][0], e.rect[i][1], e.periodic[i]))
            .collect();
        let values = read_values(&dir.join(&e.data_file), manifest.m)?;
        let mut chart = ChartGrid::new(Grid::new(axes), manifest.m, &values)?;
        if let Some(w) = &e.weight_file {
            let w = read_values(&dir.join(w), 1)?;
            if w.len() != chart.len() {
                return Err(WkitError::DimensionMismatch {
                    expected: chart.len(),
                    got: w.len(),
                });
            }
            chart = chart.with_weight(w);
        }
        if let Some(shift) = &e.period_shift {
            if shift.len() != n || shift.iter().any(|s| s.len() != manifest.m) {
                return Err(WkitError::Format(format!(
                    "chart {k}: malformed period_shift"
                )));
            }
            for (axis, s) in shift.iter().enumerate() {
                chart = chart.with_period_shift(axis, s.clone());
            }
        }
        charts.push(chart);
    }
    let atlas = Atlas {
        m: manifest.m,
        n: manifest.n,
        charts,
        closed: manifest.closed,
    };
    Ok((atlas, manifest))
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Precise<'a>(PrettyFormatter<'a>);

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17 significant digits per float. Non-finite floats
/// become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Result document of one CLI command.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct Report {
    pub version: String,
    /// Arguments as given on the command line.
    pub command: Vec<String>,
    pub seed: u64,
    pub results: serde_json::Value,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub pass: bool,
    /// Names of failed assertions.
    pub failures: Vec<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Report {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed,
            results: serde_json::Value::Object(Default::default()),
            timings: BTreeMap::new(),
            pass: true,
            failures: Vec::new(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    /// Stores a serializable result under `key`.
    pub fn insert(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        let v = serde_json::to_value(value)?;
        if let serde_json::Value::Object(map) = &mut self.results {
            map.insert(key.to_string(), v);
        }
        Ok(())
    }

    /// Records an assertion; a false `ok` marks the report failed.
    pub fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            self.pass = false;
            self.failures.push(name.to_string());
        }
    }

    pub fn time(&mut self, stage: &str, seconds: f64) {
        self.timings.insert(stage.to_string(), seconds);
    }

    /// The report without the run-dependent timestamp and timings, for
    /// byte comparison between runs.
    pub fn canonical(&self) -> Report {
        Report {
            timings: BTreeMap::new(),
            timestamp: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }
}
