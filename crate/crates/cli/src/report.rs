//! Machine-readable run reports.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use srp_core::{Edge, Matching, PreferenceSystem};

use crate::formats::emit_instance;

/// Everything a finished command produces.  The payload is deterministic:
/// identical inputs yield byte-identical JSON.
pub struct Report {
    pub command: &'static str,
    pub instance: Value,
    pub result: Value,
    pub warnings: Vec<String>,
    pub stats: Value,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "instance": self.instance,
            "result": self.result,
            "warnings": self.warnings,
            "stats": self.stats,
        })
    }
}

/// Digest plus size summary; the digest is over the canonical text form, so
/// it is independent of comments and line order in the input file.
pub fn instance_info(ps: &PreferenceSystem) -> Value {
    let canonical = emit_instance(ps);
    let digest = hex_digest(canonical.as_bytes());
    json!({
        "digest": digest,
        "agents": ps.num_agents(),
        "edges": ps.num_edges(),
    })
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn edge_json(e: Edge) -> Value {
    json!([e.lo(), e.hi()])
}

pub fn matching_json(m: &Matching) -> Value {
    Value::Array(m.edges().map(edge_json).collect())
}

/// Matching as matching-file lines.
pub fn matching_text(m: &Matching) -> String {
    let mut out = String::new();
    for e in m.edges() {
        out.push_str(&format!("{}\n", e));
    }
    out
}
