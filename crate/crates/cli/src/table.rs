use serde::{Deserialize, Serialize};

/// A typed table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Value {
    /// CSV rendering: floats with 17 significant digits, so every value
    /// round-trips exactly.
    pub fn to_csv(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) if x.is_nan() => "NaN".into(),
            Value::Float(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Value::Float(x) => format!("{x:.16e}"),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Float(x) => Some(x),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.into())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

/// Run metadata attached to every table and to the summary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub meta: RunMeta,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        ResultTable {
            name: name.into(),
            columns,
            rows: Vec::new(),
            meta: RunMeta::default(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row arity does not match the header of table `{}`",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column, in row order.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| r[i].as_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> std::io::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Value::to_csv))?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// One pass/fail acceptance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A scatter plot with an optional straight line. For log-log plots the points
/// are given in data coordinates and the line in log coordinates
/// (`ln y = slope · ln x + intercept`).
#[derive(Clone, Debug, PartialEq)]
pub struct PlotRequest {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    pub points: Vec<[f64; 2]>,
    /// `(slope, intercept)`.
    pub line: Option<[f64; 2]>,
}
