//! Human-readable digest of a finished run.

use std::fs;
use std::path::Path;

use super::run::Summary;
use super::CliError;

const ERROR_COLUMNS: [&str; 3] = ["error", "mse_se", "pv_se"];

pub fn read_summary(out_dir: &Path) -> Result<Summary, CliError> {
    let path = out_dir.join("summary.json");
    let text = fs::read_to_string(&path)
        .map_err(|_| CliError::MissingArtifact(format!("no summary.json in {}", out_dir.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::MissingArtifact(format!("{}: {e}", path.display())))
}

/// One line per assertion, the notes verbatim, and the largest Monte Carlo
/// error bar of every table that carries one.
pub fn emit_report(out_dir: &Path) -> Result<String, CliError> {
    let s = read_summary(out_dir)?;
    let mut lines = vec![format!("{} (config {}, seed {})", s.kind, &s.config_hash[..12.min(s.config_hash.len())], s.seed)];
    for a in &s.assertions {
        let verdict = if a.passed { "PASS" } else { "FAIL" };
        let mut line = format!("{}: {verdict} ({} rows)", a.family, a.rows);
        if !a.passed {
            line.push_str(&format!(": {}", a.detail));
        }
        lines.push(line);
    }
    lines.extend(s.notes.iter().cloned());
    let mut tables: Vec<String> = fs::read_dir(out_dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    tables.sort();
    for name in tables {
        let mut r = csv::Reader::from_path(out_dir.join(&name))?;
        let headers = r.headers()?.clone();
        let cols: Vec<(usize, &str)> = headers
            .iter()
            .enumerate()
            .filter(|(_, h)| ERROR_COLUMNS.contains(h))
            .collect();
        if cols.is_empty() {
            continue;
        }
        let mut worst = vec![0.0f64; cols.len()];
        for rec in r.records() {
            let rec = rec?;
            for (k, (i, _)) in cols.iter().enumerate() {
                if let Some(v) = rec.get(*i).and_then(|x| x.parse::<f64>().ok()) {
                    worst[k] = worst[k].max(v);
                }
            }
        }
        for ((_, h), w) in cols.iter().zip(worst) {
            lines.push(format!("{name}: max {h} {w}"));
        }
    }
    Ok(lines.join("\n"))
}
