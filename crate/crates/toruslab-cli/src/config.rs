//! Structured config file: `key = value` lines grouped under `[section]`
//! headers, with `#` comments. Sections are named after subcommands; flags
//! always win over config values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use toruslab::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(Error::invalid(format!("config line {}: unterminated section", lineno + 1)));
                };
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!("config line {}: expected key = value", lineno + 1)));
            };
            sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
    }

    /// flag > config > default, with parse errors reported as config errors.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        flag: Option<T>,
        section: &str,
        key: &str,
        default: T,
    ) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(section, key) {
            Some(raw) => raw.parse::<T>().map_err(|_| {
                Error::invalid(format!("config [{section}] {key}: cannot parse {raw:?}"))
            }),
            None => Ok(default),
        }
    }

    /// Required value: flag or config, no default.
    pub fn require(&self, flag: Option<String>, section: &str, key: &str) -> Result<String> {
        if let Some(v) = flag {
            return Ok(v);
        }
        self.get(section, key).map(String::from).ok_or_else(|| {
            Error::invalid(format!("missing --{key} (flag or [{section}] {key} = ... in config)"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let cfg = Config::parse("# top comment\n[zeta]\nbound = 5000\npoly = x^2 + 1\n\n[equidist]\nkmax=40\n").unwrap();
        assert_eq!(cfg.get("zeta", "bound"), Some("5000"));
        assert_eq!(cfg.resolve(None, "zeta", "bound", 10u64).unwrap(), 5000);
        assert_eq!(cfg.resolve(Some(7u64), "zeta", "bound", 10).unwrap(), 7);
        assert_eq!(cfg.resolve(None, "zeta", "missing", 10u64).unwrap(), 10);
        assert_eq!(cfg.require(None, "zeta", "poly").unwrap(), "x^2 + 1");
        assert!(cfg.require(None, "zeta", "absent").is_err());
        assert!(Config::parse("key_without_equals\n").is_err());
        assert!(cfg.resolve::<u64>(None, "equidist", "kmax", 1).unwrap() == 40);
    }
}
