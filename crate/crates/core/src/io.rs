//! Plain-text inputs: sampled traces and empirical shift histograms.
//!
//! Both formats are two comma- or whitespace-separated numeric columns,
//! with `#` comment lines and an optional non-numeric header line.

use std::fs;
use std::path::Path;

use crate::ensemble::DetuningDistribution;
use crate::error::{Error, Result};
use crate::model::OscillationTrace;
use crate::units::khz_to_angular;

/// Relative tolerance on the sample spacing of a trace file.
const SPACING_TOLERANCE: f64 = 1e-6;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses two numeric columns; the first non-comment line may be a header.
pub fn parse_two_columns(text: &str, path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        match parsed {
            Some(v) if v.len() >= 2 => {
                if !v[0].is_finite() || !v[1].is_finite() {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        reason: "non-finite value".into(),
                    });
                }
                rows.push((v[0], v[1]));
            }
            None if !seen_content => {}
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason: format!("expected two numeric columns, got `{line}`"),
                })
            }
        }
        seen_content = true;
    }
    Ok(rows)
}

/// Reads a uniformly sampled `(t_ms, value)` trace.
pub fn read_trace_csv(path: &Path) -> Result<OscillationTrace> {
    let rows = parse_two_columns(&read(path)?, path)?;
    if rows.len() < 2 {
        return Err(Error::TooFewSamples {
            min: crate::model::MIN_TRACE_SAMPLES,
            got: rows.len(),
        });
    }
    let t0 = rows[0].0;
    let dt = (rows[rows.len() - 1].0 - t0) / (rows.len() - 1) as f64;
    for (k, (t, _)) in rows.iter().enumerate() {
        if (t - (t0 + k as f64 * dt)).abs() > SPACING_TOLERANCE * dt.abs().max(1e-300) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                reason: "time column is not uniformly spaced".into(),
            });
        }
    }
    OscillationTrace::new(t0, dt, rows.into_iter().map(|r| r.1).collect())
}

/// Reads `(shift_kHz, weight)` rows into an empirical distribution; weights
/// are normalized on load.
pub fn read_empirical_distribution(path: &Path) -> Result<DetuningDistribution> {
    let rows = parse_two_columns(&read(path)?, path)?;
    let (shifts, weights) = rows.into_iter().map(|(s, w)| (khz_to_angular(s), w)).unzip();
    DetuningDistribution::empirical(shifts, weights)
}
