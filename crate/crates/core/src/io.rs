//! Delimited-text I/O for traces, spectra and result tables.
//!
//! Input files are numeric columns separated by commas, semicolons, tabs or
//! spaces. Lines starting with `#` are comments; a single non-numeric line
//! before the data is taken as a header. Output tables use commas, a `#`
//! preamble, a header row and 17 significant digits for floats.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pulse::{SampledTrace, MIN_TRACE_SAMPLES};

/// Environment variable that redirects relative output paths.
pub const OUT_DIR_ENV: &str = "FASTLIGHT_OUT_DIR";
/// Allowed relative deviation of a time step from the mean step.
pub const UNIFORMITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[index]).collect()
    }

    pub fn n_columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|f| !f.is_empty())
}

pub fn parse_numeric(text: &str, source: &str) -> Result<NumericTable> {
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = split_fields(line).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if first.len() != values.len() {
                        return Err(Error::Parse {
                            location: format!("{source}:{}", lineno + 1),
                            message: format!("expected {} columns, found {}", first.len(), values.len()),
                        });
                    }
                }
                rows.push(values);
            }
            Err(_) if rows.is_empty() && header.is_none() => {
                header = Some(fields.iter().map(|s| s.to_string()).collect());
            }
            Err(e) => {
                return Err(Error::Parse {
                    location: format!("{source}:{}", lineno + 1),
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(NumericTable { header, rows })
}

pub fn read_numeric(path: impl AsRef<Path>) -> Result<NumericTable> {
    let path = path.as_ref();
    parse_numeric(&fs::read_to_string(path)?, &path.display().to_string())
}

/// Builds a trace from `(time, amplitude)` pairs with a uniform time step.
pub fn trace_from_columns(times: &[f64], amplitudes: &[f64]) -> Result<SampledTrace<f64>> {
    let n = times.len();
    if n < MIN_TRACE_SAMPLES {
        return Err(Error::TraceTooShort(n));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::invalid("time", "timestamps must increase"));
    }
    let deviation = times
        .windows(2)
        .map(|w| ((w[1] - w[0]) - dt).abs() / dt)
        .fold(0.0, f64::max);
    if deviation > UNIFORMITY_TOLERANCE {
        return Err(Error::NonUniformGrid(deviation));
    }
    SampledTrace::new(times[0], dt, amplitudes.to_vec())
}

/// Reads a two-column `(time_seconds, amplitude)` trace.
pub fn load_trace(path: impl AsRef<Path>) -> Result<SampledTrace<f64>> {
    let path = path.as_ref();
    let table = read_numeric(path)?;
    if table.rows.len() < MIN_TRACE_SAMPLES {
        return Err(Error::TraceTooShort(table.rows.len()));
    }
    if table.n_columns() != 2 {
        return Err(Error::Parse {
            location: path.display().to_string(),
            message: format!("expected 2 columns, found {}", table.n_columns()),
        });
    }
    trace_from_columns(&table.column(0), &table.column(1))
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) if x.is_finite() => write!(f, "{x:.16e}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Written as `# ` lines before the header.
    pub preamble: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(
                "row",
                format!("expected {} cells, got {}", self.columns.len(), row.len()),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for line in &self.preamble {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        let mut writer = csv::WriterBuilder::new().from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Value::to_string))?;
        }
        writer.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Resolves a relative output path against `FASTLIGHT_OUT_DIR` when it is set.
pub fn output_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_table(path: impl AsRef<Path>, table: &Table) -> Result<()> {
    let path = output_path(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, table.to_bytes()?)?;
    Ok(())
}

/// Two-column `time_s, amplitude` table for a trace.
pub fn trace_table(trace: &SampledTrace<f64>) -> Table {
    let mut table = Table::new(["time_s", "amplitude"]);
    table.rows = trace
        .times()
        .zip(&trace.samples)
        .map(|(t, a)| vec![Value::Float(t), Value::Float(*a)])
        .collect();
    table
}

pub fn write_trace(path: impl AsRef<Path>, trace: &SampledTrace<f64>) -> Result<()> {
    write_table(path, &trace_table(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{synthesize, GridSpec, PulseSpec};

    fn pulse() -> SampledTrace<f64> {
        let grid = GridSpec::new(4e-6, 4096).unwrap();
        synthesize(&PulseSpec::gaussian(200e-9, 1.0, 2e-6).unwrap(), &grid).unwrap()
    }

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let trace = pulse();
        write_trace(&path, &trace).unwrap();
        let back = load_trace(&path).unwrap();
        assert_eq!(back.samples, trace.samples);
        assert_eq!(back.t_start, trace.t_start);
        assert!((back.dt - trace.dt).abs() <= 1e-15 * trace.dt);
    }

    #[test]
    fn seventeen_digits_are_exact() {
        for x in [0.1 + 0.2, std::f64::consts::PI * 1e-9, -1.0 / 3.0, 6.02214076e23, 5e-324] {
            let s = Value::Float(x).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn jittered_timestamps_rejected() {
        let text: String = (0..64)
            .map(|i| {
                let jitter = if i == 10 { 1e-3 } else { 0.0 };
                format!("{} {}\n", (i as f64 + jitter) * 1e-9, i)
            })
            .collect();
        let table = parse_numeric(&text, "mem").unwrap();
        let err = trace_from_columns(&table.column(0), &table.column(1)).unwrap_err();
        match err {
            Error::NonUniformGrid(dev) => assert!(dev > 5e-4 && dev < 2e-3, "{dev}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn short_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.txt");
        let text: String = (0..15).map(|i| format!("{i}e-9\t1.0\n")).collect();
        fs::write(&path, text).unwrap();
        assert!(matches!(load_trace(&path), Err(Error::TraceTooShort(15))));
    }

    #[test]
    fn flexible_delimiters_header_and_comments() {
        let mut text = String::from("# scope export\nTime (s); CH1 (V)\n");
        for i in 0..20 {
            text.push_str(&format!("{};{}\n", i as f64 * 2e-9 - 1e-8, (i as f64).sin()));
        }
        let table = parse_numeric(&text, "mem").unwrap();
        assert_eq!(table.header.as_ref().unwrap()[0], "Time");
        assert_eq!(table.rows.len(), 20);
        let trace = trace_from_columns(&table.column(0), &table.column(1)).unwrap();
        assert_eq!(trace.t_start, -1e-8);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse_numeric("1 2\n3 4 5\n", "mem").unwrap_err().to_string();
        assert!(err.contains("mem:2"), "{err}");
    }

    #[test]
    fn table_has_preamble_header_and_fixed_order() {
        let mut t = Table::new(["a", "b", "ok"]);
        t.preamble.push("note".into());
        t.push(vec![1.5.into(), 2usize.into(), true.into()]).unwrap();
        assert!(t.push(vec![1.0.into()]).is_err());
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "# note\na,b,ok\n1.5000000000000000e0,2,true\n");
    }
}
