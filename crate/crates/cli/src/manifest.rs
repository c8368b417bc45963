//! Run manifests: a stable hash of the canonicalised configuration, the
//! command that produced an output, and the files it wrote.
//!
//! Wall-clock times are deliberately absent so that identical runs produce
//! byte-identical outputs; they go to the run log instead.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "cibound";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: Value,
    pub seed: Option<u64>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &Value, seed: Option<u64>, outputs: &[&str]) -> Self {
        let config = canonicalize(config);
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config_hash: hash_value(&config),
            config,
            seed,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// One-line JSON form for embedding as a CSV comment.
    pub fn comment_line(&self) -> String {
        format!("# manifest: {}\n", serde_json::to_string(self).expect("manifest serialises"))
    }
}

/// Recursively sorts object keys. Floats keep serde_json's shortest
/// round-trip formatting, which is deterministic.
pub fn canonicalize(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), canonicalize(&m[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(canonicalize).collect()),
        other => other.clone(),
    }
}

/// Hex SHA-256 of the canonical compact JSON text.
pub fn hash_value(v: &Value) -> String {
    let text = serde_json::to_string(&canonicalize(v)).expect("json value serialises");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_order_does_not_change_hash() {
        let a = json!({"rho": 0.5, "alpha": 0.05, "nested": {"b": 1, "a": [1.5, 2]}});
        let b: Value = serde_json::from_str(r#"{"nested":{"a":[1.5,2],"b":1},"alpha":0.05,"rho":0.5}"#).unwrap();
        assert_eq!(hash_value(&a), hash_value(&b));
        assert_ne!(hash_value(&a), hash_value(&json!({"rho": 0.6, "alpha": 0.05})));
        assert_eq!(hash_value(&a).len(), 64);
    }

    #[test]
    fn manifest_round_trips() {
        let m = RunManifest::new("bound", &json!({"u": 0.1}), Some(3), &["bound.json"]);
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(m.comment_line().starts_with("# manifest: {"));
    }
}
