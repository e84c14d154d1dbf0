//! File formats: feature CSV and detection-stream CSV ingestion, the
//! key=value config file, and the CSV reports emitted by the CLI.
//! Numeric output uses Rust's shortest round-trip f64 formatting, so
//! written values parse back bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::bbox::Bbox;
use crate::error::{Error, Result};
use crate::metric::FeatureVector;
use crate::mot::MotReport;
use crate::scene::Detection;
use crate::tree::TreeStats;

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_f64(path: &Path, line: u64, field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid number in {field}: '{s}'")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value in {field}")));
    }
    Ok(v)
}

/// Contents of a feature CSV (`f0..f{D-1}[,label]`).
#[derive(Debug)]
pub struct FeatureCsv {
    pub dim: usize,
    pub vectors: Vec<FeatureVector>,
    pub labels: Vec<Option<u64>>,
    pub has_labels: bool,
}

pub fn read_feature_csv(path: &Path) -> Result<FeatureCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let headers = reader.headers().map_err(|e| {
        parse_err(path, 1, format!("cannot read header: {e}"))
    })?.clone();
    let mut dim = 0;
    for (i, h) in headers.iter().enumerate() {
        if h == format!("f{i}") {
            dim = i + 1;
        } else {
            break;
        }
    }
    if dim == 0 {
        return Err(parse_err(path, 1, "header must start with f0"));
    }
    let has_labels = headers.len() == dim + 1 && headers.iter().nth(dim) == Some("label");
    if !has_labels && headers.len() != dim {
        return Err(parse_err(
            path,
            1,
            "header must be f0..f{D-1} optionally followed by label",
        ));
    }

    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, format!("malformed row: {e}"))
        })?;
        let line = record_line(&record);
        if record.len() != headers.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, got {}", headers.len(), record.len()),
            ));
        }
        let mut values = Vec::with_capacity(dim);
        for i in 0..dim {
            values.push(parse_f64(path, line, &format!("f{i}"), &record[i])?);
        }
        let v = FeatureVector::new(values)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        vectors.push(v);
        if has_labels {
            let raw = record[dim].trim();
            let label: i64 = raw
                .parse()
                .map_err(|_| parse_err(path, line, format!("invalid label '{raw}'")))?;
            labels.push(if label < 0 { None } else { Some(label as u64) });
        } else {
            labels.push(None);
        }
    }
    Ok(FeatureCsv {
        dim,
        vectors,
        labels,
        has_labels,
    })
}

/// Detection-stream CSV header prefix before the feature columns.
const DETECTION_FIELDS: [&str; 7] = ["frame", "camera", "u", "v", "gamma", "h", "truth_id"];

pub fn read_detection_csv(path: &Path) -> Result<Vec<Detection>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, format!("cannot read header: {e}")))?
        .clone();
    for (i, name) in DETECTION_FIELDS.iter().enumerate() {
        if headers.iter().nth(i) != Some(*name) {
            return Err(parse_err(
                path,
                1,
                format!("detection header must start with {}", DETECTION_FIELDS.join(",")),
            ));
        }
    }
    let dim = headers.len() - DETECTION_FIELDS.len();
    if dim == 0 {
        return Err(parse_err(path, 1, "no feature columns (f0..)"));
    }

    let mut detections = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, format!("malformed row: {e}"))
        })?;
        let line = record_line(&record);
        if record.len() != headers.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, got {}", headers.len(), record.len()),
            ));
        }
        let frame: u64 = record[0]
            .parse()
            .map_err(|_| parse_err(path, line, "invalid frame"))?;
        let camera: u32 = record[1]
            .parse()
            .map_err(|_| parse_err(path, line, "invalid camera"))?;
        let u = parse_f64(path, line, "u", &record[2])?;
        let v = parse_f64(path, line, "v", &record[3])?;
        let gamma = parse_f64(path, line, "gamma", &record[4])?;
        let h = parse_f64(path, line, "h", &record[5])?;
        if h <= 0.0 || gamma <= 0.0 {
            return Err(parse_err(path, line, "gamma and h must be positive"));
        }
        let truth: i64 = record[6]
            .parse()
            .map_err(|_| parse_err(path, line, "invalid truth_id"))?;
        let mut values = Vec::with_capacity(dim);
        for i in 0..dim {
            let idx = DETECTION_FIELDS.len() + i;
            values.push(parse_f64(path, line, &format!("f{i}"), &record[idx])?);
        }
        let feature = FeatureVector::new(values)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        detections.push(Detection {
            frame,
            camera,
            bbox: Bbox::new(u, v, gamma, h),
            feature,
            truth_id: if truth < 0 { None } else { Some(truth as u64) },
        });
    }
    Ok(detections)
}

pub fn write_detection_csv(path: &Path, detections: &[Detection]) -> Result<()> {
    let dim = detections.first().map(|d| d.feature.dim()).unwrap_or(0);
    let mut out = String::new();
    out.push_str(&DETECTION_FIELDS.join(","));
    for i in 0..dim {
        let _ = write!(out, ",f{i}");
    }
    out.push('\n');
    for d in detections {
        let truth = d.truth_id.map(|t| t as i64).unwrap_or(-1);
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            d.frame, d.camera, d.bbox.u, d.bbox.v, d.bbox.gamma, d.bbox.h, truth
        );
        for x in d.feature.as_slice() {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Simple key=value configuration file; `#` starts a comment.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(path, i as u64 + 1, "expected key=value"));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// One benchmark measurement row: averaged search costs plus the tree
/// shape at measurement time.
#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub scenario: String,
    pub n: u64,
    pub avg_distances: f64,
    pub avg_comparisons: f64,
    pub avg_search_time_s: f64,
    pub height: u64,
    pub internal_nodes: u64,
    pub internal_profile_nodes: u64,
    pub leaf_nodes: u64,
    pub profiles: u64,
    pub indexed_vectors: u64,
}

impl BenchRecord {
    pub fn from_stats(
        scenario: impl Into<String>,
        n: u64,
        avg_distances: f64,
        avg_comparisons: f64,
        avg_search_time_s: f64,
        tree: &TreeStats,
    ) -> Self {
        BenchRecord {
            scenario: scenario.into(),
            n,
            avg_distances,
            avg_comparisons,
            avg_search_time_s,
            height: tree.height as u64,
            internal_nodes: tree.internal_count as u64,
            internal_profile_nodes: tree.internal_profile_count as u64,
            leaf_nodes: tree.leaf_count as u64,
            profiles: tree.profile_count as u64,
            indexed_vectors: tree.indexed_vectors as u64,
        }
    }
}

pub const BENCH_HEADER: &str = "scenario,n,avg_distances,avg_comparisons,avg_search_time_s,height,internal_nodes,internal_profile_nodes,leaf_nodes,profiles,indexed_vectors";

pub fn format_bench_records(records: &[BenchRecord]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.n,
            r.avg_distances,
            r.avg_comparisons,
            r.avg_search_time_s,
            r.height,
            r.internal_nodes,
            r.internal_profile_nodes,
            r.leaf_nodes,
            r.profiles,
            r.indexed_vectors
        );
    }
    out
}

pub fn write_bench_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    std::fs::write(path, format_bench_records(records))?;
    Ok(())
}

/// Per-query result row for `index query`.
#[derive(Clone, Debug)]
pub struct QueryRecord {
    pub query: u64,
    /// Matched label, or -1 for a miss.
    pub label: i64,
    /// 1 when the (online) query created a new label.
    pub created: bool,
    pub distances: u64,
    pub comparisons: u64,
    pub time_s: f64,
}

pub fn format_query_records(records: &[QueryRecord]) -> String {
    let mut out = String::from("query,label,created,distances,comparisons,time_s\n");
    let mut sum_d = 0u64;
    let mut sum_c = 0u64;
    let mut sum_t = 0.0f64;
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.query, r.label, r.created as u8, r.distances, r.comparisons, r.time_s
        );
        sum_d += r.distances;
        sum_c += r.comparisons;
        sum_t += r.time_s;
    }
    let n = records.len().max(1) as f64;
    let _ = writeln!(
        out,
        "avg,,,{},{},{}",
        sum_d as f64 / n,
        sum_c as f64 / n,
        sum_t / n
    );
    out
}

/// Tracking report: the metric row plus one row per finished track.
pub fn format_mot_report(report: &MotReport) -> String {
    let mut out = String::from("id_switches,fragmentations,false_positives,false_negatives,mostly_tracked,mostly_lost,mota,motp\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        report.id_switches,
        report.fragmentations,
        report.false_positives,
        report.false_negatives,
        report.mostly_tracked,
        report.mostly_lost,
        report.mota,
        report.motp
    );
    out
}
