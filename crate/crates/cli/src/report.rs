//! Merges JSON outputs into one summary keyed by kind and config hash.
//!
//! A summary fed back in contributes its sections unchanged, so reporting
//! over a report reproduces it byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use crate::CliError;

pub const SUMMARY_KIND: &str = "summary";

fn section_key(doc: &Value) -> Option<String> {
    let kind = doc.get("kind")?.as_str()?;
    let hash = doc.get("config_hash")?.as_str()?;
    Some(format!("{kind}/{hash}"))
}

/// Merges parsed documents; later inputs win on equal keys.
pub fn merge(docs: &[Value]) -> Result<Value, CliError> {
    let mut sections: BTreeMap<String, Value> = BTreeMap::new();
    for doc in docs {
        if doc.get("kind").and_then(Value::as_str) == Some(SUMMARY_KIND) {
            let inner = doc
                .get("sections")
                .and_then(Value::as_object)
                .ok_or_else(|| CliError::config("summary without a `sections` object"))?;
            for (k, v) in inner {
                sections.insert(k.clone(), v.clone());
            }
        } else {
            let key = section_key(doc)
                .ok_or_else(|| CliError::config("input lacks `kind` or `config_hash`"))?;
            sections.insert(key, doc.clone());
        }
    }
    Ok(json!({
        "kind": SUMMARY_KIND,
        "version": wandering_core::VERSION,
        "sections": sections,
    }))
}

pub fn merge_files(paths: &[impl AsRef<Path>]) -> Result<Vec<u8>, CliError> {
    let docs = paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{} is not JSON: {e}", p.display())))
        })
        .collect::<Result<Vec<Value>, CliError>>()?;
    let mut out = serde_json::to_vec_pretty(&merge(&docs)?).map_err(|e| CliError::io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}
