//! Report writers: CSV with anchor headers plus a JSON summary.

use crate::experiments::{ExperimentInfo, Outcome};
use std::path::Path;

pub fn write_reports(
    dir: &Path,
    info: &ExperimentInfo,
    outcome: &Outcome,
    seed: u64,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut csv = String::new();
    csv.push_str(&format!(
        "# experiment={} section={} anchor={} seed={}\n",
        info.name, info.section, info.anchor, seed
    ));
    csv.push_str(&outcome.report_header);
    csv.push('\n');
    for row in &outcome.report_rows {
        csv.push_str(row);
        csv.push('\n');
    }
    std::fs::write(dir.join("report.csv"), csv)?;

    if let Some(sv) = &outcome.singular_values {
        std::fs::write(dir.join("singular_values.csv"), sv)?;
    }
    if let Some(k) = &outcome.k_operator {
        std::fs::write(
            dir.join("K_operator.json"),
            serde_json::to_string_pretty(k)?,
        )?;
    }

    let metrics: serde_json::Map<String, serde_json::Value> = outcome
        .metrics
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect();
    let summary = serde_json::json!({
        "experiment": info.name,
        "anchors": info.anchor,
        "verdict": if outcome.verdict { "PASS" } else { "FAIL" },
        "metrics": metrics,
    });
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(())
}
