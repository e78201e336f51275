//! CSV and JSON serialization of experiment and timing results.

use std::io::Write;

use serde::Serialize;

use crate::bench::{ReportRow, TimingPoint, TrialReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    estimator: &'a str,
    sweep_param: &'a str,
    sweep_value: f64,
    n: usize,
    trials_ok: u32,
    trials_failed: u32,
    bias_m: Option<f64>,
    rmse_m: Option<f64>,
    rcrlb_m: Option<f64>,
    mean_time_s: Option<f64>,
    master_seed: u64,
}

impl<'a> From<&'a ReportRow> for CsvRow<'a> {
    fn from(r: &'a ReportRow) -> Self {
        CsvRow {
            estimator: &r.estimator,
            sweep_param: &r.sweep_param,
            sweep_value: r.sweep_value,
            n: r.n,
            trials_ok: r.trials_ok,
            trials_failed: r.trials_failed,
            bias_m: r.bias_m,
            rmse_m: r.rmse_m,
            rcrlb_m: r.rcrlb_m,
            mean_time_s: r.mean_time_s,
            master_seed: r.master_seed,
        }
    }
}

pub fn write_csv_rows<W: Write, T: Serialize>(
    out: W,
    rows: impl IntoIterator<Item = T>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(std::io::Error::other)?;
    }
    w.flush()
}

pub fn write_report<W: Write>(
    report: &TrialReport,
    format: Format,
    mut out: W,
) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv_rows(out, report.rows.iter().map(CsvRow::from)),
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)
        }
    }
}

pub fn write_timing<W: Write>(
    points: &[TimingPoint],
    format: Format,
    mut out: W,
) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv_rows(out, points),
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, points)?;
            writeln!(out)
        }
    }
}

pub fn report_to_string(report: &TrialReport, format: Format) -> String {
    let mut buf = Vec::new();
    write_report(report, format, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 output")
}
