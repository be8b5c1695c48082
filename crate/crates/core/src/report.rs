//! Result files: a JSON document, a flat CSV table, one SVG heatmap per
//! grid and a manifest of content hashes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmark::{CellResult, CircuitKind, VolumetricGrid};
use crate::config::BenchmarkConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportSpec {
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl ReportSpec {
    pub fn new(output_dir: impl Into<PathBuf>, formats: impl IntoIterator<Item = Format>) -> Result<ReportSpec> {
        let mut formats: Vec<Format> = formats.into_iter().collect();
        formats.sort();
        formats.dedup();
        if formats.is_empty() {
            return Err(Error::invalid("at least one output format is required"));
        }
        Ok(ReportSpec {
            output_dir: output_dir.into(),
            formats,
        })
    }

    pub fn all(output_dir: impl Into<PathBuf>) -> ReportSpec {
        ReportSpec {
            output_dir: output_dir.into(),
            formats: vec![Format::Json, Format::Csv, Format::Svg],
        }
    }
}

/// The stored results document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema_version: u32,
    pub config: BenchmarkConfig,
    pub grids: Vec<VolumetricGrid>,
}

impl ResultsDocument {
    pub fn new(config: BenchmarkConfig, grids: Vec<VolumetricGrid>) -> ResultsDocument {
        ResultsDocument {
            schema_version: SCHEMA_VERSION,
            config,
            grids,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<ResultsDocument> {
        let doc: ResultsDocument = serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported schema version {}",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ResultsDocument> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per circuit per method; empty cells get a single `empty` row.
pub fn results_csv(grids: &[VolumetricGrid]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "method", "n", "d", "status", "circuit_id", "circuit_hash", "ideal", "noisy", "mitigated",
        "eps_n", "eps_em", "eps_rel", "sigma_eps", "normality_passes", "message",
    ];
    let csv_err = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for g in grids {
        for c in &g.cells {
            let (n, d) = (c.n.to_string(), c.d.to_string());
            if c.per_circuit.is_empty() {
                let msg = c.error.clone().unwrap_or_default();
                let mut row = vec![g.method.as_str().to_string(), n.clone(), d.clone(), "empty".into()];
                row.extend(std::iter::repeat_n(String::new(), 10));
                row.push(msg);
                w.write_record(&row).map_err(csv_err)?;
                continue;
            }
            for r in &c.per_circuit {
                let status = match (&r.failure, r.errors.and_then(|e| e.eps_rel)) {
                    (Some(_), _) => "failed",
                    (None, None) => "undefined",
                    (None, Some(_)) => "ok",
                };
                let row = [
                    g.method.as_str().to_string(),
                    n.clone(),
                    d.clone(),
                    status.to_string(),
                    r.circuit_id.to_string(),
                    r.circuit_hash.clone(),
                    num(r.ideal),
                    num(r.noisy),
                    opt(r.mitigated),
                    opt(r.errors.map(|e| e.eps_n)),
                    opt(r.errors.map(|e| e.eps_em)),
                    opt(r.errors.and_then(|e| e.eps_rel)),
                    opt(r.sigma_eps),
                    r.normality.map(|c| c.passes.to_string()).unwrap_or_default(),
                    r.failure.clone().unwrap_or_default(),
                ];
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

/// Write the requested formats plus `manifest.txt`. Returns every path
/// written, manifest last.
pub fn write_results(doc: &ResultsDocument, spec: &ReportSpec) -> Result<Vec<PathBuf>> {
    if doc.grids.is_empty() {
        return Err(Error::invalid("no grids to write"));
    }
    let dir = &spec.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for f in &spec.formats {
        match f {
            Format::Json => written.push(write_file(&dir.join("results.json"), doc.to_json()?.as_bytes())?),
            Format::Csv => written.push(write_file(&dir.join("results.csv"), results_csv(&doc.grids)?.as_bytes())?),
            Format::Svg => {
                for g in &doc.grids {
                    match render_heatmap(g, dir) {
                        Ok(p) => written.push(p),
                        Err(Error::NothingToRender(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    written.push(write_manifest(dir, &written)?);
    Ok(written)
}

/// `manifest.txt`: `sha256  file name` per line.
pub fn write_manifest(dir: &Path, files: &[PathBuf]) -> Result<PathBuf> {
    let mut out = String::new();
    for f in files {
        let bytes = fs::read(f).map_err(|e| Error::io(f, e))?;
        let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        writeln!(out, "{}  {}", hex::encode(Sha256::digest(&bytes)), name).expect("string write");
    }
    write_file(&dir.join("manifest.txt"), out.as_bytes())
}

// ==== Heatmap ====

const PERFECT: [f64; 3] = [26.0, 152.0, 80.0];
const BREAK_EVEN: [f64; 3] = [255.0, 255.0, 191.0];
const FAIL_LOW: [f64; 3] = [253.0, 174.0, 97.0];
const FAIL_HIGH: [f64; 3] = [165.0, 0.0, 38.0];
const NO_DATA: &str = "#d9d9d9";

fn mix(a: [f64; 3], b: [f64; 3], t: f64) -> String {
    let c: Vec<u8> = (0..3).map(|i| (a[i] + (b[i] - a[i]) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Fill colour for a relative error: green at 0 fading to pale yellow at 1,
/// then orange to dark red on (1, 2]; values above 2 are clipped.
pub fn eps_color(eps: Option<f64>) -> String {
    match eps {
        None => NO_DATA.to_string(),
        Some(e) if e.is_nan() => NO_DATA.to_string(),
        Some(e) => {
            let t = e.clamp(0.0, 2.0);
            if t <= 1.0 {
                mix(PERFECT, BREAK_EVEN, t)
            } else {
                mix(FAIL_LOW, FAIL_HIGH, t - 1.0)
            }
        }
    }
}

fn class_label(g: &VolumetricGrid) -> String {
    let kind = match g.class.kind {
        CircuitKind::RandomSu4 => "random SU(4)",
        CircuitKind::PauliGadget => "Pauli gadget",
    };
    let mirror = if g.class.mirrored { ", mirrored" } else { "" };
    format!("{} / {kind}{mirror}", g.method.as_str())
}

/// Heatmap of `grid` as `heatmap_<method>.svg` in `dir`. Rows are widths,
/// columns depths; the outer square shows the median and the inner square
/// the worst relative error.
pub fn render_heatmap(grid: &VolumetricGrid, dir: &Path) -> Result<PathBuf> {
    let svg = heatmap_svg(grid)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join(format!("heatmap_{}.svg", grid.method.as_str())), svg.as_bytes())
}

pub fn heatmap_svg(grid: &VolumetricGrid) -> Result<String> {
    if grid.cells.iter().all(|c| c.summary.is_empty()) {
        return Err(Error::NothingToRender(format!("grid '{}' has no populated cells", class_label(grid))));
    }
    let mut ns: Vec<usize> = grid.cells.iter().map(|c| c.n).collect();
    let mut ds: Vec<usize> = grid.cells.iter().map(|c| c.d).collect();
    ns.sort_unstable();
    ns.dedup();
    ds.sort_unstable();
    ds.dedup();
    let cell = 56.0;
    let (left, top) = (70.0, 50.0);
    let width = left + cell * ds.len() as f64 + 150.0;
    let height = (top + cell * ns.len() as f64 + 60.0).max(top + 260.0);
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(w, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
    writeln!(w, r#"<text x="{left}" y="24" font-size="14">{}</text>"#, class_label(grid)).unwrap();
    let find = |n: usize, d: usize| -> Option<&CellResult> { grid.cells.iter().find(|c| c.n == n && c.d == d) };
    // Widths grow upwards.
    for (row, &n) in ns.iter().rev().enumerate() {
        let y = top + row as f64 * cell;
        writeln!(w, r#"<text x="{}" y="{}" text-anchor="end">{n}</text>"#, left - 8.0, y + cell / 2.0 + 4.0).unwrap();
        for (col, &d) in ds.iter().enumerate() {
            let x = left + col as f64 * cell;
            let (median, worst) = find(n, d).map_or((None, None), |c| (c.summary.median_eps, c.summary.worst_eps));
            writeln!(w, r##"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#404040"/>"##, x + 2.0, y + 2.0, cell - 4.0, cell - 4.0, eps_color(median)).unwrap();
            let inner = cell * 0.4;
            let off = (cell - inner) / 2.0;
            writeln!(w, r##"<rect x="{}" y="{}" width="{inner}" height="{inner}" fill="{}" stroke="#404040"/>"##, x + off, y + off, eps_color(worst)).unwrap();
        }
    }
    let bottom = top + cell * ns.len() as f64;
    for (col, &d) in ds.iter().enumerate() {
        writeln!(w, r#"<text x="{}" y="{}" text-anchor="middle">{d}</text>"#, left + col as f64 * cell + cell / 2.0, bottom + 16.0).unwrap();
    }
    writeln!(w, r#"<text x="{}" y="{}" text-anchor="middle">depth d</text>"#, left + cell * ds.len() as f64 / 2.0, bottom + 36.0).unwrap();
    writeln!(w, r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">qubits n</text>"#, top + cell * ns.len() as f64 / 2.0, top + cell * ns.len() as f64 / 2.0).unwrap();
    // Legend: 40 steps over [0, 2].
    let lx = left + cell * ds.len() as f64 + 40.0;
    let steps = 40;
    let bar = 200.0;
    writeln!(w, r#"<text x="{lx}" y="{}">ε</text>"#, top - 8.0).unwrap();
    for i in 0..steps {
        let v = 2.0 * (i as f64 + 0.5) / steps as f64;
        let y = top + bar - (i + 1) as f64 * bar / steps as f64;
        writeln!(w, r#"<rect x="{lx}" y="{y}" width="18" height="{}" fill="{}"/>"#, bar / steps as f64, eps_color(Some(v))).unwrap();
    }
    for (v, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1"), (1.5, "1.5"), (2.0, "≥2")] {
        let y = top + bar - v / 2.0 * bar;
        writeln!(w, r##"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="#404040"/>"##, lx + 22.0).unwrap();
        writeln!(w, r#"<text x="{}" y="{}">{label}</text>"#, lx + 26.0, y + 4.0).unwrap();
    }
    writeln!(w, r##"<rect x="{lx}" y="{}" width="18" height="10" fill="{NO_DATA}"/>"##, top + bar + 12.0).unwrap();
    writeln!(w, r#"<text x="{}" y="{}">no data</text>"#, lx + 26.0, top + bar + 21.0).unwrap();
    writeln!(w, r#"<text x="{lx}" y="{}" font-size="10">outer: median, inner: worst</text>"#, top + bar + 40.0).unwrap();
    writeln!(w, "</svg>").unwrap();
    Ok(s)
}
