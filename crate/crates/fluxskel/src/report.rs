//! JSON and CSV serialization of evaluation reports and sweep tables.

use fluxskel_core::eval::EvalReport;
use fluxskel_core::synth::SweepRow;
use serde_json::{json, Value};

/// Report as JSON:
/// `{"pr": [{"t","p","r"}...], "best": {"t","p","r","f"}, "counts": {"tp","fp","fn"}}`.
pub fn report_to_json(report: &EvalReport) -> Value {
    json!({
        "pr": report
            .pr_points
            .iter()
            .map(|pt| json!({"t": pt.threshold, "p": pt.precision, "r": pt.recall}))
            .collect::<Vec<_>>(),
        "best": {
            "t": report.best.threshold,
            "p": report.best.precision,
            "r": report.best.recall,
            "f": report.best.f_measure,
        },
        "counts": {
            "tp": report.counts.true_positives,
            "fp": report.counts.false_positives,
            "fn": report.counts.false_negatives,
        },
    })
}

/// PR points as CSV with header `threshold,precision,recall`.
pub fn report_to_csv(report: &EvalReport) -> String {
    let mut out = String::from("threshold,precision,recall\n");
    for pt in &report.pr_points {
        out.push_str(&format!(
            "{},{},{}\n",
            pt.threshold, pt.precision, pt.recall
        ));
    }
    out
}

/// Sweep table as CSV with header `r,f_measure`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("r,f_measure\n");
    for row in rows {
        out.push_str(&format!("{},{}\n", row.r, row.f_measure));
    }
    out
}

/// Sweep table as a JSON array of `{"r", "f_measure"}` objects.
pub fn sweep_to_json(rows: &[SweepRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| json!({"r": row.r, "f_measure": row.f_measure}))
            .collect(),
    )
}
