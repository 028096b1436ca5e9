//! Artifact writers: CSV with comment headers, JSON records, both written
//! atomically (temp file in the target directory, then rename) so concurrent
//! runs never leave interleaved partial files.
//!
//! CSV files begin with `#` comment lines recording the tool version, the
//! resolved configuration on a single line, and any task-specific metadata.
//! JSON files carry the same information as an embedded "meta" object since
//! comments are not valid JSON. Floats are written with 17 significant
//! digits so reruns diff byte-for-byte.

use std::io::Write as IoWrite;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17-significant-digit float formatting shared by all CSV columns.
pub fn fnum(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comment header prefixed to every CSV artifact.
pub struct Header<'a> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub seed: Option<u64>,
    /// Extra metadata lines, one header comment each.
    pub extra: Vec<String>,
}

impl Header<'_> {
    fn lines(&self) -> Result<Vec<String>> {
        let cfg = serde_json::to_string(self.config)?;
        let mut out = vec![
            format!("# transient-scatter {ARTIFACT_VERSION} {}", self.command),
            format!("# config: {cfg}"),
        ];
        if let Some(seed) = self.seed {
            out.push(format!("# seed: {seed}"));
        }
        out.extend(self.extra.iter().map(|e| format!("# {e}")));
        Ok(out)
    }
}

/// Writes bytes to `path` through a temp file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// CSV artifact: header comments, a column-name row, then data rows.
pub fn write_csv(
    path: &Path,
    header: &Header,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut buf = String::new();
    for line in header.lines()? {
        buf.push_str(&line);
        buf.push('\n');
    }
    buf.push_str(&columns.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    write_atomic(path, buf.as_bytes())
}

/// JSON record with the version and resolved config embedded under "meta".
pub fn write_json_record<T: Serialize>(
    path: &Path,
    command: &str,
    config: &RunConfig,
    seed: Option<u64>,
    record: &T,
) -> Result<String> {
    let body = serde_json::json!({
        "meta": {
            "tool": format!("transient-scatter {ARTIFACT_VERSION}"),
            "command": command,
            "seed": seed,
            "config": config,
        },
        "result": record,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&body)?);
    write_atomic(path, text.as_bytes())?;
    Ok(text)
}
