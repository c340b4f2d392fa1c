//! Result files: a metadata header (tool version, config hash, config), one
//! isolated timestamp line, then CSV rows or a JSON document. Every float is
//! written with 17 significant digits.

use super::{CliError, Format, RunConfig};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

pub const FORMAT_VERSION: u32 = 1;

pub fn versions() -> String {
    format!("okl-core {} (output format {FORMAT_VERSION})", env!("CARGO_PKG_VERSION"))
}

/// `x` in scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn timestamp() -> String {
    let s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{s}")
}

/// Pretty JSON with floats forced to 17 significant digits.
struct Sci17<'a>(PrettyFormatter<'a>);

impl Formatter for Sci17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json17<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serialisable value");
    String::from_utf8(buf).expect("utf-8 json")
}

/// Plot-ready table; `columns` ends with `re, im, err_estimate` for grids.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `key: value` header lines (method, settings).
    pub notes: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: String,
    command: &'a str,
    config_sha256: String,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    meta: Meta<'a>,
    timestamp: String,
    data: &'a T,
}

fn meta<'a>(cfg: &'a RunConfig, command: &'a str) -> Meta<'a> {
    Meta { tool: versions(), command, config_sha256: cfg.hash(), config: cfg }
}

/// JSON document `{meta, timestamp, data}`; the timestamp sits on its own line.
pub fn render_json<T: Serialize>(cfg: &RunConfig, command: &str, data: &T) -> String {
    let mut s = to_json17(&Document { meta: meta(cfg, command), timestamp: timestamp(), data });
    s.push('\n');
    s
}

pub fn render_table(cfg: &RunConfig, command: &str, table: &Table) -> String {
    match cfg.output.format {
        Format::Json => render_json(cfg, command, table),
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&format!("# tool: {}\n", versions()));
            s.push_str(&format!("# command: {command}\n"));
            s.push_str(&format!("# config_sha256: {}\n", cfg.hash()));
            s.push_str(&format!("# config: {}\n", cfg.to_json()));
            for (k, v) in &table.notes {
                s.push_str(&format!("# {k}: {v}\n"));
            }
            s.push_str(&format!("# timestamp: {}\n", timestamp()));
            s.push_str(&table.columns.join(","));
            s.push('\n');
            for r in &table.rows {
                let cells: Vec<String> = r.iter().map(|v| fmt17(*v)).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    }
}

/// Writes to `output.path`, or stdout when unset.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Drops the timestamp line; what remains is reproducible.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp:") && !l.trim_start().starts_with("\"timestamp\":"))
        .collect::<Vec<_>>()
        .join("\n")
}
