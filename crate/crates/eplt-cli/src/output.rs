//! Report tables and their CSV/JSON encodings.
//!
//! Numbers are printed with 12 significant digits so reruns are
//! byte-comparable; infinities are the literal `inf`/`-inf`. The only
//! non-reproducible output line is the timestamped header.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Value {
    fn to_csv(&self) -> String {
        match self {
            Value::Num(x) => format_sig(*x),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Num(x) => {
                if x.is_finite() {
                    serde_json::json!(x)
                } else {
                    serde_json::json!(format_sig(*x))
                }
            }
            Value::Int(i) => serde_json::json!(i),
            Value::Bool(b) => serde_json::json!(b),
            Value::Text(s) => serde_json::json!(s),
        }
    }
}

/// 12 significant digits, scientific; sentinels spelled out.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.11e}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in table {}", self.name);
        self.rows.push(row);
    }
}

/// Full command output: key/value summary entries plus data tables and the
/// overall certification verdict that drives the exit code.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub summary: Vec<(String, Value)>,
    pub tables: Vec<Table>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), summary: Vec::new(), tables: Vec::new(), pass: true }
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.summary.push((key.to_string(), value));
    }

    pub fn to_csv(&self, timestamp: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# generated: {timestamp}");
        let _ = writeln!(out, "# command: {}", self.command);
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {}: {}", k, v.to_csv());
        }
        let _ = writeln!(out, "# pass: {}", self.pass);
        for table in &self.tables {
            let _ = writeln!(out, "# table: {}", table.name);
            let _ = writeln!(out, "{}", table.columns.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Value::to_csv).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        out
    }

    pub fn to_json(&self, timestamp: &str) -> String {
        let mut tables = serde_json::Map::new();
        for table in &self.tables {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (col, val) in table.columns.iter().zip(row) {
                        obj.insert(col.clone(), val.to_json());
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            tables.insert(table.name.clone(), serde_json::Value::Array(rows));
        }
        let mut summary = serde_json::Map::new();
        for (k, v) in &self.summary {
            summary.insert(k.clone(), v.to_json());
        }
        let doc = serde_json::json!({
            "generated": timestamp,
            "command": self.command,
            "summary": serde_json::Value::Object(summary),
            "pass": self.pass,
            "tables": serde_json::Value::Object(tables),
        });
        serde_json::to_string_pretty(&doc).expect("report serialization")
    }
}
