//! Run manifests: everything needed to reproduce a run, as pretty JSON with
//! sorted keys.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "ufg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub params: BTreeMap<String, Value>,
    pub seeds: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub sizes: BTreeMap<String, u64>,
    /// Exact UNSAT values as `p/q` strings, only where an oracle ran.
    pub unsat: BTreeMap<String, String>,
    pub details: BTreeMap<String, Value>,
    /// Only recorded with `--timing`, so default manifests stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Manifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            subcommand: subcommand.into(),
            params: BTreeMap::new(),
            seeds: BTreeMap::new(),
            mode: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            sizes: BTreeMap::new(),
            unsat: BTreeMap::new(),
            details: BTreeMap::new(),
            wall_time_ms: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.details.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn size(&mut self, key: &str, value: u64) -> &mut Self {
        self.sizes.insert(key.into(), value);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }
}
