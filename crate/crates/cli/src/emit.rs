//! Table emission: CSV at 9 significant digits (plot-grade), JSON at 17
//! significant digits (bit-exact round trip for every finite f64).
//! Files are written atomically: full content to a sibling temp file,
//! then rename.

use std::io::{self, Write};
use std::path::Path;

use serde_json::ser::Formatter;
use serde_json::{Map, Value};

use crate::settings::{OutputFormat, Settings};
use crate::CliError;

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Real(f64),
    Count(u64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => {
                if s.contains(',') || s.contains('"') {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Real(x) => format!("{x:.8e}"),
            Cell::Count(n) => format!("{n}"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Real(x) => match serde_json::Number::from_f64(*x) {
                Some(n) => Value::Number(n),
                // non-finite values cannot be JSON numbers
                None => Value::String(format!("{x}")),
            },
            Cell::Count(n) => Value::Number((*n).into()),
        }
    }
}

/// A rectangular report with fixed, documented column order.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self, command: &str, settings: &Settings) -> Result<String, CliError> {
        let mut config = Map::new();
        for (k, v) in settings.describe(command) {
            config.insert(k, Value::String(v));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert(col.to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("command".to_string(), Value::String(command.to_string()));
        root.insert("config".to_string(), Value::Object(config));
        root.insert(
            "columns".to_string(),
            Value::Array(
                self.columns
                    .iter()
                    .map(|c| Value::String(c.to_string()))
                    .collect(),
            ),
        );
        root.insert("rows".to_string(), Value::Array(rows));

        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17::default());
        serde::Serialize::serialize(&Value::Object(root), &mut ser)
            .map_err(|e| CliError::Io(format!("json encode: {e}")))?;
        buf.push(b'\n');
        String::from_utf8(buf).map_err(|e| CliError::Io(format!("json encode: {e}")))
    }

    /// Render per the settings and either write atomically to the
    /// configured path or print to stdout.
    pub fn emit(&self, command: &str, settings: &Settings) -> Result<(), CliError> {
        let content = match settings.format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(command, settings)?,
        };
        match &settings.output {
            Some(path) => write_atomic(path, &content)
                .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

/// JSON formatter printing every float with 17 significant digits, which
/// round-trips any finite f64 bit-exactly.
#[derive(Default)]
struct Sig17 {
    compact: serde_json::ser::CompactFormatter,
}

impl Formatter for Sig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.compact.write_f32(writer, value)
    }
}

fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp.{}", std::process::id()));
    let tmp = Path::new(&tmp);
    std::fs::write(tmp, content)?;
    std::fs::rename(tmp, path)
}

/// The reproducibility header every command prints to stdout.
pub fn print_resolved(command: &str, settings: &Settings) {
    for (k, v) in settings.describe(command) {
        println!("# {k} = {v}");
    }
}
