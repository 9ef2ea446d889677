//! Campaign report files.
//!
//! Reports are written as pretty-printed JSON plus, optionally, a
//! delimited per-round series that plotting tools can ingest directly.
//! Serialization is deterministic: the same report value always produces
//! the same bytes, so reruns with equal seeds can be diffed file-to-file.

use crate::error::{Error, Result};
use crate::harness::CampaignReport;
use std::fs;
use std::path::Path;

/// Writes the report as JSON (UTF-8, trailing newline).
pub fn write_report(report: &CampaignReport, path: &Path) -> Result<()> {
    let mut body = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidConfig(format!("report serialization failed: {e}")))?;
    body.push('\n');
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Reads a report written by [`write_report`].
pub fn read_report(path: &Path) -> Result<CampaignReport> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&body).map_err(|e| Error::DatasetFormat {
        path: path.to_path_buf(),
        reason: format!("not a campaign report: {e}"),
    })
}

/// Writes the per-round loss series as comma-separated values with a
/// header row. Local-method reports have no series; the file then holds
/// only the header.
pub fn write_round_series(report: &CampaignReport, path: &Path) -> Result<()> {
    let mut out = String::from("round,max_loss,avg_loss,cum_max_loss\n");
    for s in &report.rounds {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            s.round, s.max_loss, s.avg_loss, s.cum_max_loss
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
