//! Point-cloud file formats.
//!
//! CSV: one row per point, coordinate columns `x1..xd`, an optional final
//! `weight` column, header row required. JSON: an object
//! `{"points": [[...], ...], "weights": [...]}` with optional weights.
//! Floats are written with 17 significant digits so files round-trip
//! bit-for-bit.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::measure::EmpiricalMeasure;
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct PointCloud {
    points: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

/// Formats a float with 17 significant digits (bit-faithful round-trips).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a point cloud from CSV (header row required; a final column named
/// `weight` carries weights).
pub fn read_points_csv<R: Read>(reader: R) -> Result<EmpiricalMeasure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::Parse("empty CSV header".into()));
    }
    let has_weight = headers
        .iter()
        .next_back()
        .map(|h| h.eq_ignore_ascii_case("weight"))
        .unwrap_or(false);
    let coord_cols = if has_weight {
        headers.len() - 1
    } else {
        headers.len()
    };
    if coord_cols == 0 {
        return Err(Error::Parse("CSV has no coordinate columns".into()));
    }

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        let mut p = Vec::with_capacity(coord_cols);
        for field in record.iter().take(coord_cols) {
            p.push(parse_float(field)?);
        }
        points.push(p);
        if has_weight {
            weights.push(parse_float(&record[coord_cols])?);
        }
    }
    EmpiricalMeasure::from_points(points, has_weight.then_some(weights))
}

/// Reads a point cloud from the JSON object format.
pub fn read_points_json<R: Read>(reader: R) -> Result<EmpiricalMeasure> {
    let cloud: PointCloud = serde_json::from_reader(reader)?;
    EmpiricalMeasure::from_points(cloud.points, cloud.weights)
}

/// Writes the support and weights as CSV (`x1..xd,weight`).
pub fn write_points_csv<W: Write>(writer: W, measure: &EmpiricalMeasure) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=measure.dim()).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    wtr.write_record(&header)?;
    for (p, &w) in measure.points().iter().zip(measure.weights()) {
        let mut row: Vec<String> = p.iter().map(|&x| format_float(x)).collect();
        row.push(format_float(w));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Loads a measure from a file, choosing the format by extension
/// (`.json` for JSON, anything else for CSV).
pub fn load_measure(path: &Path) -> Result<EmpiricalMeasure> {
    let data = fs::File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => read_points_json(data),
        _ => read_points_csv(data),
    }
}

fn parse_float(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("invalid number `{s}`")))
}
