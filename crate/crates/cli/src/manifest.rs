//! Run manifest: one appended entry per stage execution, carrying input
//! content hashes and the effective parameters, so any artifact can be
//! reproduced from its manifest entry.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use litmap_core::artifact::{json_escape, sha256_file};
use litmap_core::corpus::timestamp_rfc3339;
use serde::Deserialize;

use crate::CliError;

pub const MANIFEST_SCHEMA: &str = "litmap/manifest/v1";

#[derive(Debug, Clone, Deserialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ManifestEntry {
    pub stage: String,
    pub tool_version: String,
    pub timestamp: String,
    pub inputs: Vec<InputRef>,
    pub params: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl ManifestEntry {
    pub fn new(stage: &str) -> Self {
        ManifestEntry {
            stage: stage.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp_rfc3339(),
            inputs: Vec::new(),
            params: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path) -> Result<Self, CliError> {
        self.inputs.push(InputRef {
            path: path.display().to_string(),
            sha256: sha256_file(path).map_err(CliError::from)?,
        });
        Ok(self)
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }
}

#[derive(Deserialize)]
struct ManifestFile {
    #[allow(dead_code)]
    schema: String,
    entries: Vec<ManifestEntry>,
}

fn render_entry(out: &mut String, entry: &ManifestEntry) {
    let inputs: Vec<String> = entry
        .inputs
        .iter()
        .map(|i| {
            format!(
                "{{\"path\":{},\"sha256\":{}}}",
                json_escape(&i.path),
                json_escape(&i.sha256)
            )
        })
        .collect();
    let params: Vec<String> = entry
        .params
        .iter()
        .map(|(k, v)| format!("{}:{}", json_escape(k), json_escape(v)))
        .collect();
    let outputs: Vec<String> = entry.outputs.iter().map(|o| json_escape(o)).collect();
    let _ = write!(
        out,
        "    {{\"stage\":{},\"tool_version\":{},\"timestamp\":{},\"inputs\":[{}],\"params\":{{{}}},\"outputs\":[{}]}}",
        json_escape(&entry.stage),
        json_escape(&entry.tool_version),
        json_escape(&entry.timestamp),
        inputs.join(","),
        params.join(","),
        outputs.join(",")
    );
}

/// Paths under the output directory are recorded relative to it, so two
/// runs over the same inputs produce identical manifests regardless of
/// where their output directories live.
fn relativize(path: &str, out_dir: &Path) -> String {
    Path::new(path)
        .strip_prefix(out_dir)
        .map(|p| p.display().to_string())
        .unwrap_or_else(|_| path.to_string())
}

/// Appends one entry to `<out_dir>/manifest.json`, creating it on first use.
pub fn append(out_dir: &Path, mut entry: ManifestEntry) -> Result<(), CliError> {
    for input in &mut entry.inputs {
        input.path = relativize(&input.path, out_dir);
    }
    for output in &mut entry.outputs {
        *output = relativize(output, out_dir);
    }
    let path = out_dir.join("manifest.json");
    let mut entries: Vec<ManifestEntry> = if path.exists() {
        let bytes = std::fs::read(&path).map_err(litmap_core::Error::from)?;
        let file: ManifestFile =
            serde_json::from_slice(&bytes).map_err(litmap_core::Error::from)?;
        file.entries
    } else {
        Vec::new()
    };
    entries.push(entry);

    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"schema\": {},", json_escape(MANIFEST_SCHEMA));
    out.push_str("  \"entries\": [\n");
    for (i, e) in entries.iter().enumerate() {
        render_entry(&mut out, e);
        out.push_str(if i + 1 < entries.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    std::fs::write(&path, out).map_err(litmap_core::Error::from)?;
    Ok(())
}
