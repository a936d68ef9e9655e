//! Deterministic table emission (markdown grid or RFC-4180 CSV).
//!
//! Columns are density groups with one mesh-level sub-column each. Output
//! is byte-deterministic for
//! a given table; wall-clock columns only appear when explicitly enabled
//! and are excluded from golden comparisons.

use crate::experiment::ResultTable;

fn level_label(level: usize) -> String {
    match level {
        0 => "C".to_string(),
        1 => "I".to_string(),
        2 => "F".to_string(),
        n => format!("L{n}"),
    }
}

fn column_labels(t: &ResultTable) -> Vec<String> {
    let mut labels = Vec::new();
    for &rho in &t.densities {
        for &level in &t.levels {
            labels.push(format!("rho={rho} {}", level_label(level)));
        }
    }
    labels
}

pub fn emit_markdown(t: &ResultTable, timings: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!("## dt = {} ms\n\n", t.dt_ms));
    let labels = column_labels(t);
    out.push_str("| preconditioner | solver |");
    for l in &labels {
        out.push_str(&format!(" {l} |"));
    }
    out.push('\n');
    out.push_str("|---|---|");
    for _ in &labels {
        out.push_str("---|");
    }
    out.push('\n');
    for row in &t.rows {
        out.push_str(&format!("| {} | {} |", row.precond.name(), row.solver.name()));
        for cell in &row.cells {
            out.push_str(&format!(" {} |", cell.display(t.max_iterations)));
        }
        out.push('\n');
        if timings {
            out.push_str(&format!(
                "| {} | {} (s) |",
                row.precond.name(),
                row.solver.name()
            ));
            for time in &row.times {
                out.push_str(&format!(" {time:.3} |"));
            }
            out.push('\n');
        }
    }
    out
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn emit_csv(t: &ResultTable, timings: bool) -> String {
    let mut out = String::new();
    let mut header = vec!["dt_ms".to_string(), "preconditioner".to_string(), "solver".to_string()];
    header.extend(column_labels(t));
    if timings {
        header.push("total_time_s".to_string());
    }
    out.push_str(
        &header
            .iter()
            .map(|h| csv_quote(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push_str("\r\n");
    for row in &t.rows {
        let mut fields = vec![
            format!("{}", t.dt_ms),
            row.precond.name().to_string(),
            row.solver.name().to_string(),
        ];
        for cell in &row.cells {
            fields.push(cell.display(t.max_iterations));
        }
        if timings {
            fields.push(format!("{:.3}", row.times.iter().sum::<f64>()));
        }
        out.push_str(
            &fields
                .iter()
                .map(|f| csv_quote(f))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push_str("\r\n");
    }
    out
}
