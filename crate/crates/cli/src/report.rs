//! Report document and CSV tables. Every float is written with 17
//! significant digits so binary64 values read back exactly.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::RunConfig;
use crate::CliError;

pub const REPORT_FORMAT: &str = "polydisk-report/1";

/// `d.dddddddddddddddde±x`, the fixed 17-significant-digit form.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON with floats in [`fmt_f64`] form; non-finite values become `null`.
struct Formatter17(PrettyFormatter<'static>);

impl Formatter for Formatter17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Formatter17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8 json")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorObject {
    pub kind: String,
    pub message: String,
}

impl From<&CliError> for ErrorObject {
    fn from(e: &CliError) -> Self {
        ErrorObject {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialEntry {
    pub function: String,
    pub structurally_inner: bool,
    pub angles_per_dim: usize,
    pub radii: Vec<f64>,
    pub deviations: Vec<f64>,
    pub decreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoodInnerEntry {
    pub function: String,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub clamped: Vec<usize>,
    pub clamp: f64,
    pub nodes_per_dim: usize,
    pub tolerance: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionRecord {
    pub permutation: Vec<usize>,
    pub scanned_members: usize,
    pub angle_tol: f64,
    pub angle_cell: Vec<i64>,
    pub limit_angles: Vec<f64>,
    /// `[re, im]` pairs.
    pub lambda: Vec<[f64; 2]>,
    pub gamma: Vec<[f64; 2]>,
    pub boundary_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageEntry {
    pub stage: usize,
    pub index: u64,
    pub target: String,
    pub tolerance: f64,
    pub budget: f64,
    pub condition_a: f64,
    pub condition_b: f64,
    pub projection_error: f64,
    pub own_error: f64,
    pub interference: Vec<f64>,
    pub retroactive: Vec<f64>,
    pub inverse_law_residual: f64,
    pub projected_corrector_index: u32,
    pub projected: String,
    pub factor_corrector_index: u32,
    pub factor: String,
    pub factor_pin_residual: f64,
    pub escalations: u32,
    pub search_evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRow {
    pub target: usize,
    pub function: String,
    pub best_index: u64,
    pub value: f64,
    /// `ε_j + δ` for construction runs, absent for plain orbit sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RandomCheck {
    pub target: usize,
    pub index: u64,
    pub points: usize,
    pub sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniversalSection {
    pub selection: Option<SelectionRecord>,
    pub stages: Vec<StageEntry>,
    pub indices: Vec<u64>,
    pub product: Option<String>,
    pub verification: Vec<VerificationRow>,
    pub random_check: Vec<RandomCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSection {
    pub x: String,
    pub indices: String,
    pub verification: Vec<VerificationRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub library_version: &'static str,
    pub mode: String,
    /// `ok`, `engine-failure` or `config-error`.
    pub status: &'static str,
    pub seed: u64,
    pub config: Option<RunConfig>,
    pub error: Option<ErrorObject>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnose_inner: Option<Vec<RadialEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub good_inner: Option<Vec<GoodInnerEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universal: Option<UniversalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSection>,
    pub tables: Vec<String>,
    pub timings_file: String,
}

impl Report {
    pub fn new(mode: &str, seed: u64, config: Option<RunConfig>) -> Self {
        Report {
            format: REPORT_FORMAT,
            library_version: polydisk_core::VERSION,
            mode: mode.to_string(),
            status: "ok",
            seed,
            config,
            error: None,
            diagnose_inner: None,
            good_inner: None,
            universal: None,
            orbit: None,
            tables: Vec::new(),
            timings_file: TIMINGS_FILE.into(),
        }
    }
}

/// Wall-clock timings live beside the report so the report itself stays
/// byte-identical across repeated runs.
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub phases: Vec<(String, f64)>,
}

/// A CSV table with a header row, RFC 4180 quoting and LF line endings.
pub struct Table {
    pub name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .quote_style(csv::QuoteStyle::Necessary)
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_file(&dir.join(&self.name), &self.to_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
