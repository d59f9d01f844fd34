//! CSV and JSON writers. Every real number is written with 17 significant
//! digits so identical runs produce identical bytes.

use std::io::Write;
use std::str::FromStr;

use darboux2l::verify::CheckReport;
use serde_json::{json, Map, Number, Value};

use crate::config::{Format, RunConfig};
use crate::run::{RunOutput, Table};
use crate::CliError;

/// Bumped whenever the JSON layout changes.
pub const FORMAT_VERSION: u32 = 1;

/// `{:.16e}` keeps 17 significant digits and round-trips every f64.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format_real(x)).expect("valid JSON number"))
    } else {
        Value::Null
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn write_table_csv<W: Write>(table: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_real(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub const REPORT_COLUMNS: [&str; 8] = ["check_name", "max_residual", "threshold", "passed", "worst_t", "t_start", "t_end", "n_points"];

fn write_reports_csv<W: Write>(reports: &[CheckReport], out: W) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    let mut header: Vec<&str> = REPORT_COLUMNS.to_vec();
    header.push("notes");
    w.write_record(&header)?;
    for r in reports {
        w.write_record([
            r.check_name.clone(),
            format_real(r.max_residual),
            format_real(r.threshold),
            r.passed.to_string(),
            format_real(r.worst_t),
            format_real(r.grid.t_start()),
            format_real(r.grid.t_end()),
            r.grid.len().to_string(),
            r.notes.join("; "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn report_json(r: &CheckReport) -> Value {
    json!({
        "check_name": r.check_name,
        "grid": {"t_start": real(r.grid.t_start()), "t_end": real(r.grid.t_end()), "n_points": r.grid.len()},
        "max_residual": real(r.max_residual),
        "threshold": real(r.threshold),
        "passed": r.passed,
        "worst_t": real(r.worst_t),
        "notes": r.notes,
    })
}

pub fn document(cfg: &RunConfig, output: &RunOutput) -> Value {
    let mut parameters = Map::new();
    for (name, &v) in &cfg.params {
        parameters.insert((*name).to_string(), real(v));
    }
    for (name, v) in &cfg.amplitudes {
        parameters.insert((*name).to_string(), json!([real(v.re), real(v.im)]));
    }
    if !cfg.radii.is_empty() {
        parameters.insert("radii".into(), cfg.radii.iter().map(|&x| real(x)).collect());
        parameters.insert("constants".into(), cfg.constants.iter().map(|&x| real(x)).collect());
    }
    let table = output.table.as_ref().map_or(Value::Null, |t| {
        json!({
            "columns": t.columns,
            "rows": t.rows.iter().map(|row| row.iter().map(|&x| real(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    });
    json!({
        "format_version": FORMAT_VERSION,
        "command": cfg.command.name(),
        "family": cfg.family.map(|f| f.name()),
        "seed": cfg.seed.map(|s| match s {
            crate::config::SeedKind::Constant => "constant",
            crate::config::SeedKind::Tanh => "tanh",
        }),
        "parameters": parameters,
        "epsilons": cfg.epsilons.iter().map(|e| json!([real(e.re), real(e.im)])).collect::<Vec<_>>(),
        "grid": {"t_start": real(cfg.grid.t_start), "t_end": real(cfg.grid.t_end), "n_points": cfg.grid.n_points},
        "tolerances": {"rel_tol": real(cfg.rel_tol), "abs_tol": real(cfg.abs_tol)},
        "negative_control": cfg.negative_control,
        "table": table,
        "reports": output.reports.iter().map(report_json).collect::<Vec<_>>(),
        "passed": output.passed(),
    })
}

/// Writes the run result. CSV carries the table, or the reports for
/// `verify`; in CSV mode a table-producing command also gets a report
/// summary on `summary`.
pub fn write<W: Write, S: Write>(cfg: &RunConfig, output: &RunOutput, mut out: W, mut summary: S) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &document(cfg, output))?;
            out.write_all(b"\n")?;
        }
        Format::Csv => match &output.table {
            Some(table) => {
                write_table_csv(table, &mut out)?;
                if !output.reports.is_empty() {
                    write_reports_csv(&output.reports, &mut summary)?;
                }
            }
            None => write_reports_csv(&output.reports, &mut out)?,
        },
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_with_17_digits() {
        for x in [0.1, -2.0, 1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert_eq!(s.split('e').next().unwrap().replace(['-', '.'], "").len(), 17, "{s}");
        }
        assert_eq!(format_real(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn json_numbers_keep_their_text() {
        let v = real(0.1);
        assert_eq!(serde_json::to_string(&v).unwrap(), "1.0000000000000001e-1");
        assert_eq!(real(f64::NAN), Value::Null);
    }
}
