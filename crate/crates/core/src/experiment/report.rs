use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::runner::{ResultRow, SummaryRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "trial,method,m,levels,accuracy,acc_per_class,flops_measured,flops_predicted,wallclock_ms";

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// Renders rows under [`CSV_HEADER`], sorted by trial, method, `m` and
/// level. Per-class accuracies are `;`-joined in class order.
pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.trial, r.method, r.m, r.levels));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.3}",
            r.trial,
            r.method,
            r.m,
            r.levels,
            r.accuracy,
            join(&r.acc_per_class),
            r.flops_measured,
            r.flops_predicted,
            r.wallclock_ms
        );
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config("no result rows to write".into()));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, rows_to_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn emit_summary_csv(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let mut out = String::from(
        "method,m,levels,trials,accuracy_mean,accuracy_std,acc_per_class_mean,flops_mean,flops_std\n",
    );
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.method,
            s.m,
            s.levels,
            s.trials,
            s.accuracy_mean,
            s.accuracy_std,
            join(&s.acc_per_class_mean),
            s.flops_mean,
            s.flops_std
        );
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
