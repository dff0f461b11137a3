//! CSV, JSON summary and per-trial artifact files.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde_json::Value;

use crate::run::{RunResult, Summary, TrialRow};

pub const SUMMARY_SCHEMA: &str = include_str!("../schemas/summary.schema.json");

pub fn write_csv<W: Write>(rows: &[TrialRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[TrialRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

/// Checks a summary against the shipped schema, listing every violation.
pub fn validate_summary(summary: &Value) -> Result<()> {
    let schema: Value = serde_json::from_str(SUMMARY_SCHEMA).context("parsing summary schema")?;
    let validator = jsonschema::validator_for(&schema).map_err(|e| anyhow!("invalid summary schema: {e}"))?;
    let problems: Vec<String> = validator
        .iter_errors(summary)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(anyhow!("summary does not match its schema: {}", problems.join("; ")))
    }
}

pub fn summary_json(summary: &Summary) -> Result<String> {
    let value = serde_json::to_value(summary)?;
    validate_summary(&value)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes `trials.csv`, `summary.json` and, when present, one
/// `samples/seed-<seed>.json` per trial under `dir`.
pub fn write_outputs(dir: &Path, result: &RunResult) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_file(&dir.join("trials.csv"), &csv_string(&result.rows)?)?;
    write_file(&dir.join("summary.json"), &summary_json(&result.summary)?)?;
    if !result.artifacts.is_empty() {
        let sub = dir.join("samples");
        fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;
        for (seed, value) in &result.artifacts {
            write_file(&sub.join(format!("seed-{seed}.json")), &serde_json::to_string(value)?)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_fixed() {
        let row = TrialRow {
            seed: 7,
            task: "snap".into(),
            k: 5,
            n: None,
            d: 1,
            eps: 0.05,
            snr: None,
            ratio: Some(0.5),
            samples: 0,
            k_tilde: 5,
            pass: true,
            wall_ms: None,
        };
        let text = csv_string(&[row]).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "seed,task,k,n,d,eps,snr,ratio,samples,k_tilde,pass,wall_ms"
        );
        assert_eq!(lines.next().unwrap(), "7,snap,5,,1,0.05,,0.5,0,5,true,");
    }

    #[test]
    fn schema_rejects_malformed_summaries() {
        assert!(validate_summary(&serde_json::json!({"task": "snap"})).is_err());
    }
}
