//! CSV and JSON reports. Both formats carry the same fields.

use std::io::Write;

use ctxmeasure_core::metastudy::MetaResult;
use serde::Serialize;

use crate::config::Format;
use crate::error::Result;

/// One metric value for one prediction; `fm` indexes the record's maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub id: String,
    pub fm: usize,
    pub metric: String,
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaRow {
    pub metric: String,
    pub protocol: String,
    pub statistic: Option<f64>,
    pub display: String,
    pub sample_count: usize,
    pub excluded: usize,
    pub seed: u64,
}

impl From<&MetaResult> for MetaRow {
    fn from(r: &MetaResult) -> Self {
        Self {
            metric: r.metric.clone(),
            protocol: r.protocol.name().into(),
            statistic: r.statistic,
            display: r.statistic.map_or_else(|| "n/a".into(), percent),
            sample_count: r.sample_count,
            excluded: r.excluded,
            seed: r.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CamoRow {
    pub id: String,
    pub object_pixels: usize,
    pub covered_pixels: usize,
    pub mean_degree: Option<f64>,
    pub error: Option<String>,
}

/// A fraction as a percentage with two decimals, rounded half up.
/// Positive values that would print as at most 0.01% print as `≤0.01%`.
pub fn percent(fraction: f64) -> String {
    let pct = fraction * 100.0;
    if pct > 0.0 && pct <= 0.01 {
        return "≤0.01%".into();
    }
    // the nudge absorbs binary representation error at exact halves
    let hundredths = (pct * 100.0 + 0.5 + 1e-9).floor();
    format!("{:.2}%", hundredths / 100.0)
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n").map_err(serde_json::Error::io)?;
        }
    }
    Ok(())
}
