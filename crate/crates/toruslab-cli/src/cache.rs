//! Content-addressed result cache: JSON blobs under `out_dir/cache`, keyed
//! by the SHA-256 of the canonical serialization of the input description.
//! Hits are verified by re-hashing the stored input; corrupt or mismatched
//! entries are recomputed with a warning.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use toruslab::Result;

/// Canonical JSON: object keys sorted recursively, arrays in order, compact
/// separators. Used for hashing only.
pub fn canonical(v: &Value) -> String {
    fn sort(v: &Value) -> Value {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                let mut out = serde_json::Map::new();
                for k in keys {
                    out.insert(k.clone(), sort(&map[k]));
                }
                Value::Object(out)
            }
            Value::Array(items) => Value::Array(items.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    sort(v).to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
    pub enabled: bool,
}

/// Outcome of a cache-wrapped computation, for logging and manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    Disabled,
}

impl CacheStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheStatus::Hit => "hit",
            CacheStatus::Miss => "miss",
            CacheStatus::Disabled => "disabled",
        }
    }
}

impl Cache {
    pub fn new(out_dir: &Path, enabled: bool) -> Self {
        Cache { dir: out_dir.join("cache"), enabled }
    }

    /// Fetch the result for `input` or compute and store it.
    pub fn get_or(
        &self,
        input: &Value,
        compute: impl FnOnce() -> Result<Value>,
    ) -> Result<(Value, CacheStatus)> {
        if !self.enabled {
            return Ok((compute()?, CacheStatus::Disabled));
        }
        let canon = canonical(input);
        let key = sha256_hex(canon.as_bytes());
        let path = self.dir.join(format!("{key}.json"));
        if path.exists() {
            match std::fs::read_to_string(&path) {
                Ok(text) => match serde_json::from_str::<Value>(&text) {
                    Ok(doc) => {
                        let stored_input = &doc["input"];
                        if sha256_hex(canonical(stored_input).as_bytes()) == key
                            && !doc["result"].is_null()
                        {
                            eprintln!("cache hit {}", &key[..12]);
                            return Ok((doc["result"].clone(), CacheStatus::Hit));
                        }
                        eprintln!("warning: cache entry {} failed verification; recomputing", &key[..12]);
                    }
                    Err(_) => {
                        eprintln!("warning: cache entry {} is corrupt; recomputing", &key[..12]);
                    }
                },
                Err(e) => eprintln!("warning: cache entry {} unreadable ({e}); recomputing", &key[..12]),
            }
        }
        let result = compute()?;
        std::fs::create_dir_all(&self.dir)?;
        let doc = json!({ "input": input, "result": result });
        let mut buf = serde_json::to_vec_pretty(&doc).expect("cache document");
        buf.push(b'\n');
        std::fs::write(&path, buf)?;
        Ok((result, CacheStatus::Miss))
    }
}
