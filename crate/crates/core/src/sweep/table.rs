use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Model, SweepError, SweepRow};

pub const CSV_HEADER: [&str; 15] = [
    "model",
    "n_sites",
    "param",
    "grid_value",
    "delta",
    "e0_i",
    "e0_f",
    "avg_work",
    "delta_u",
    "irr_work",
    "variance",
    "avg_work_per_delta",
    "irr_per_delta2",
    "eq2_discrepancy",
    "flags",
];

/// Trailing comment marking a file whose sweep did not finish.
pub const INCOMPLETE_MARKER: &str = "# INCOMPLETE";

fn io_err(path: &Path, e: impl std::fmt::Display) -> SweepError {
    SweepError::Io(format!("{}: {e}", path.display()))
}

/// 17 significant digits, enough to re-parse every finite `f64` exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn record(row: &SweepRow) -> Vec<String> {
    let nums = [
        row.grid_value,
        row.delta,
        row.e0_i,
        row.e0_f,
        row.avg_work,
        row.delta_u,
        row.irr_work,
        row.variance,
        row.avg_work_per_delta,
        row.irr_per_delta2,
        row.eq2_discrepancy,
    ];
    let mut out = vec![
        row.model.label().to_string(),
        row.n_sites.to_string(),
        row.param.clone(),
    ];
    out.extend(nums.iter().map(|&x| fmt_f64(x)));
    out.push(row.flags.join(";"));
    out
}

/// Incremental writer: comment lines, header, then rows as they arrive.
pub struct CsvWriter<W: Write = BufWriter<File>> {
    inner: W,
    label: String,
}

impl CsvWriter {
    pub fn create(path: &Path, comments: &[String]) -> Result<Self, SweepError> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        CsvWriter::from_writer(BufWriter::new(file), &path.display().to_string(), comments)
    }
}

impl<W: Write> CsvWriter<W> {
    /// Writes to any sink; `label` names it in error messages.
    pub fn from_writer(inner: W, label: &str, comments: &[String]) -> Result<Self, SweepError> {
        let mut w = Self {
            inner,
            label: label.to_string(),
        };
        for c in comments {
            for line in c.lines() {
                writeln!(w.inner, "# {line}").map_err(|e| w.err(e))?;
            }
        }
        w.write_fields(CSV_HEADER.iter().map(|s| s.to_string()).collect())?;
        Ok(w)
    }

    fn err(&self, e: impl std::fmt::Display) -> SweepError {
        SweepError::Io(format!("{}: {e}", self.label))
    }

    fn write_fields(&mut self, fields: Vec<String>) -> Result<(), SweepError> {
        let mut line = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        line.write_record(&fields).map_err(|e| self.err(e))?;
        let bytes = line.into_inner().map_err(|e| self.err(e))?;
        self.inner.write_all(&bytes).map_err(|e| self.err(e))
    }

    pub fn write_row(&mut self, row: &SweepRow) -> Result<(), SweepError> {
        self.write_fields(record(row))
    }

    /// Flushes after appending the incomplete marker.
    pub fn finish_incomplete(mut self) -> Result<(), SweepError> {
        writeln!(self.inner, "{INCOMPLETE_MARKER}").map_err(|e| self.err(e))?;
        self.finish()
    }

    pub fn finish(mut self) -> Result<(), SweepError> {
        self.inner.flush().map_err(|e| self.err(e))
    }
}

/// Writes `rows` under the fixed header; each comment becomes a `#` line
/// at the top of the file.
pub fn write_csv(rows: &[SweepRow], path: &Path, comments: &[String]) -> Result<(), SweepError> {
    let mut w = CsvWriter::create(path, comments)?;
    for row in rows {
        w.write_row(row)?;
    }
    w.finish()
}

/// Reads a file written by [`write_csv`]; `#` lines are skipped.
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>, SweepError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let header = reader.headers().map_err(|e| csv_err(&e))?.clone();
    for (index, expected) in CSV_HEADER.iter().enumerate() {
        let found = header.get(index).unwrap_or("");
        if found != *expected {
            return Err(SweepError::Schema {
                index,
                expected: expected.to_string(),
                found: found.to_string(),
            });
        }
    }
    if header.len() > CSV_HEADER.len() {
        return Err(SweepError::Schema {
            index: CSV_HEADER.len(),
            expected: String::new(),
            found: header[CSV_HEADER.len()].to_string(),
        });
    }

    let mut rows = Vec::new();
    for result in reader.records() {
        let rec = result.map_err(|e| csv_err(&e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |column: &str, value: &str| SweepError::Csv {
            line,
            message: format!("column {column}: cannot parse {value:?}"),
        };
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64, SweepError> {
            field(i).trim().parse::<f64>().map_err(|_| bad(CSV_HEADER[i], field(i)))
        };
        let model = Model::from_label(field(0)).ok_or_else(|| bad("model", field(0)))?;
        let n_sites = field(1).trim().parse::<usize>().map_err(|_| bad("n_sites", field(1)))?;
        let flags_field = field(14);
        rows.push(SweepRow {
            model,
            n_sites,
            param: field(2).to_string(),
            grid_value: num(3)?,
            delta: num(4)?,
            e0_i: num(5)?,
            e0_f: num(6)?,
            avg_work: num(7)?,
            delta_u: num(8)?,
            irr_work: num(9)?,
            variance: num(10)?,
            avg_work_per_delta: num(11)?,
            irr_per_delta2: num(12)?,
            eq2_discrepancy: num(13)?,
            flags: if flags_field.is_empty() {
                Vec::new()
            } else {
                flags_field.split(';').map(str::to_string).collect()
            },
        });
    }
    Ok(rows)
}

fn csv_err(e: &csv::Error) -> SweepError {
    SweepError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}
