//! Output files: pretty JSON with 17-significant-digit floats, CSV with a
//! single header row, and the config/seed echo every file carries.
//!
//! Every JSON document has the shape
//! `{"generated_at": ..., "seed": ..., "config": {...}, <payload>...}`;
//! the `generated_at` value is the only non-reproducible field and sits on
//! its own line. CSV files carry the same information as `#`-prefixed
//! comment lines above the header row.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn json(&self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }

    pub fn csv(&self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }
}

/// Floats serialized with 17 significant digits (exact f64 round-trip).
pub fn format_float(value: f64) -> String {
    if value == 0.0 {
        // Avoids "-0e0" asymmetry between runs.
        return "0e0".to_string();
    }
    format!("{value:.16e}")
}

struct SigFigPretty {
    indent: usize,
    has_value: bool,
}

impl SigFigPretty {
    fn new() -> Self {
        Self { indent: 0, has_value: false }
    }

    fn newline<W: ?Sized + Write>(&self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for SigFigPretty {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite float in output"));
        }
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

/// Pretty JSON text with 17-significant-digit floats and sorted keys.
pub fn to_json_string(value: &Value) -> Result<String> {
    let mut bytes = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut bytes, SigFigPretty::new());
    value.serialize(&mut ser).context("serializing output JSON")?;
    bytes.push(b'\n');
    Ok(String::from_utf8(bytes).expect("serde_json emits UTF-8"))
}

/// Destination directory plus the config echo included in every file.
pub struct RunArtifacts {
    dir: PathBuf,
    format: OutputFormat,
    seed: u64,
    config: Value,
    written: Vec<PathBuf>,
}

impl RunArtifacts {
    pub fn new(dir: &Path, format: OutputFormat, seed: u64, plan: &impl Serialize) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let config = serde_json::to_value(plan).context("encoding resolved config")?;
        Ok(Self { dir: dir.to_path_buf(), format, seed, config, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn timestamp() -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    }

    /// Writes `<name>.json` with the standard envelope; `payload` keys are
    /// merged at the top level.
    pub fn write_json(&mut self, name: &str, payload: Value) -> Result<Option<PathBuf>> {
        if !self.format.json() {
            return Ok(None);
        }
        let mut doc = serde_json::Map::new();
        doc.insert("generated_at".into(), Value::String(Self::timestamp().to_string()));
        doc.insert("seed".into(), Value::Number(self.seed.into()));
        doc.insert("config".into(), self.config.clone());
        match payload {
            Value::Object(map) => {
                for (k, v) in map {
                    doc.insert(k, v);
                }
            }
            other => {
                doc.insert("payload".into(), other);
            }
        }
        let path = self.dir.join(format!("{name}.json"));
        std::fs::write(&path, to_json_string(&Value::Object(doc))?)
            .with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(Some(path))
    }

    /// Writes `<name>.csv`: comment lines (generated_at, seed, config),
    /// one header row, then the data rows.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<Option<PathBuf>> {
        if !self.format.csv() {
            return Ok(None);
        }
        let path = self.dir.join(format!("{name}.csv"));
        let mut text = String::new();
        text.push_str(&format!("# generated_at={}\n", Self::timestamp()));
        text.push_str(&format!("# seed={}\n", self.seed));
        let config_line =
            serde_json::to_string(&self.config).context("encoding config comment")?;
        text.push_str(&format!("# config={config_line}\n"));
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(Some(path))
    }

    /// Registers a file produced outside the JSON/CSV envelope (binary
    /// streams).
    pub fn note_written(&mut self, path: PathBuf) {
        self.written.push(path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_carry_17_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-0.92), "-9.2000000000000004e-1");
        assert_eq!(format_float(0.0), "0e0");
        let round_trip: f64 = format_float(6.4 / 3600.0).parse().unwrap();
        assert_eq!(round_trip, 6.4 / 3600.0);
    }

    #[test]
    fn json_formatter_is_valid_and_sorted() {
        let doc = json!({"b": 0.5, "a": [1.0, 2], "nested": {"z": 1e-300, "y": "s"}});
        let text = to_json_string(&doc).unwrap();
        // keys sorted by serde_json's BTreeMap backing
        let a = text.find("\"a\"").unwrap();
        let b = text.find("\"b\"").unwrap();
        assert!(a < b);
        assert!(text.contains("5.0000000000000000e-1"));
        // still parseable JSON
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"], json!(0.5));
    }

}
