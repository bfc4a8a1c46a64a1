//! Artifacts: CSV (RFC 4180 body, `#` header lines) and JSON records, both
//! carrying the full resolved configuration. The only line that changes
//! between identical runs is the `generated_unix=` one.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::config::Settings;

pub const TIMESTAMP_KEY: &str = "generated_unix";

pub fn header(settings: &Settings, extra: &[String]) -> Vec<String> {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut h = vec![format!("fracmc {} {}", settings.command(), env!("CARGO_PKG_VERSION")), format!("{TIMESTAMP_KEY}={now}")];
    h.extend(settings.header_lines());
    h.extend(extra.iter().cloned());
    h
}

pub fn csv_text(header: &[String], columns: &[&str], rows: &[Vec<String>]) -> std::io::Result<String> {
    let mut out = String::new();
    for h in header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    out.push_str(&String::from_utf8(body).expect("csv of utf-8 fields"));
    Ok(out)
}

pub fn json_text(header: &[String], body: Value) -> String {
    let mut v = json!({ "header": header });
    if let (Some(o), Value::Object(b)) = (v.as_object_mut(), body) {
        o.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when it is empty.
pub fn emit(path: &str, text: &str) -> std::io::Result<()> {
    if path.is_empty() {
        let mut o = std::io::stdout().lock();
        o.write_all(text.as_bytes())?;
        return o.flush();
    }
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}

/// `f` formatted so that it parses back to the same bits.
pub fn num(f: f64) -> String {
    format!("{f:?}")
}
