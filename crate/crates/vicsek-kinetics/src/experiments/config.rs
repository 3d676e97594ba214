//! Flat `key = value` configuration files.
//!
//! The format is deliberately minimal for diff-friendly provenance: one
//! `key = value` pair per line, `#` starts a comment, no sections, no
//! nesting, duplicate keys rejected. Recipes *take* the keys they use
//! (recording the resolved value, defaults included) and then call
//! [`RawConfig::finish`], which rejects any key that was never consumed —
//! typos never pass silently.

use super::ExperimentError;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
    consumed: bool,
}

/// A parsed configuration file with consumption tracking.
#[derive(Clone, Debug)]
pub struct RawConfig {
    name: String,
    entries: BTreeMap<String, Entry>,
    resolved: BTreeMap<String, String>,
    sha256: String,
}

impl RawConfig {
    /// Parses configuration text. `name` labels parse errors (a file path
    /// or a test tag).
    pub fn from_str(text: &str, name: &str) -> Result<Self, ExperimentError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ExperimentError::Parse {
                file: name.into(),
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty()
                || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            {
                return Err(ExperimentError::Parse {
                    file: name.into(),
                    line: line_no,
                    msg: format!("invalid key `{key}` (lowercase, digits, underscores)"),
                });
            }
            if entries
                .insert(key.to_string(), Entry { value: value.to_string(), line: line_no, consumed: false })
                .is_some()
            {
                return Err(ExperimentError::Parse {
                    file: name.into(),
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        let sha256 = hex_digest(text.as_bytes());
        Ok(Self { name: name.into(), entries, resolved: BTreeMap::new(), sha256 })
    }

    /// Reads and parses a configuration file.
    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text, &path.display().to_string())
    }

    /// Name used in error messages (the source path).
    pub fn name(&self) -> &str {
        &self.name
    }

    /// SHA-256 of the raw configuration text (provenance hash).
    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    /// Inserts or replaces a key before the recipe runs (CLI overrides).
    pub fn override_key(&mut self, key: &str, value: &str) {
        self.entries.insert(
            key.to_string(),
            Entry { value: value.to_string(), line: 0, consumed: false },
        );
    }

    /// True when the key is present (does not consume it).
    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        if let Some(entry) = self.entries.get_mut(key) {
            entry.consumed = true;
            Some(entry.value.clone())
        } else {
            None
        }
    }

    fn record(&mut self, key: &str, value: impl ToString) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// Required string value.
    pub fn take_str(&mut self, key: &str) -> Result<String, ExperimentError> {
        let value =
            self.take_raw(key).ok_or_else(|| ExperimentError::MissingKey(key.into()))?;
        self.record(key, &value);
        Ok(value)
    }

    /// Optional string value with a default.
    pub fn take_str_or(&mut self, key: &str, default: &str) -> Result<String, ExperimentError> {
        let value = self.take_raw(key).unwrap_or_else(|| default.to_string());
        self.record(key, &value);
        Ok(value)
    }

    pub fn take_f64(&mut self, key: &str) -> Result<f64, ExperimentError> {
        let raw = self.take_str(key)?;
        parse_f64(key, &raw)
    }

    pub fn take_f64_or(&mut self, key: &str, default: f64) -> Result<f64, ExperimentError> {
        match self.take_raw(key) {
            Some(raw) => {
                self.record(key, &raw);
                parse_f64(key, &raw)
            }
            None => {
                self.record(key, default);
                Ok(default)
            }
        }
    }

    pub fn take_u64(&mut self, key: &str) -> Result<u64, ExperimentError> {
        let raw = self.take_str(key)?;
        raw.parse().map_err(|_| bad(key, &raw, "an unsigned integer"))
    }

    pub fn take_u64_or(&mut self, key: &str, default: u64) -> Result<u64, ExperimentError> {
        match self.take_raw(key) {
            Some(raw) => {
                self.record(key, &raw);
                raw.parse().map_err(|_| bad(key, &raw, "an unsigned integer"))
            }
            None => {
                self.record(key, default);
                Ok(default)
            }
        }
    }

    pub fn take_usize_or(&mut self, key: &str, default: usize) -> Result<usize, ExperimentError> {
        Ok(self.take_u64_or(key, default as u64)? as usize)
    }

    pub fn take_bool_or(&mut self, key: &str, default: bool) -> Result<bool, ExperimentError> {
        match self.take_raw(key) {
            Some(raw) => {
                self.record(key, &raw);
                match raw.as_str() {
                    "true" | "yes" | "1" => Ok(true),
                    "false" | "no" | "0" => Ok(false),
                    _ => Err(bad(key, &raw, "a boolean")),
                }
            }
            None => {
                self.record(key, default);
                Ok(default)
            }
        }
    }

    /// Required comma-separated list of reals.
    pub fn take_f64_list(&mut self, key: &str) -> Result<Vec<f64>, ExperimentError> {
        let raw = self.take_str(key)?;
        split_list(&raw).map(|item| parse_f64(key, item)).collect()
    }

    /// Optional comma-separated list of reals.
    pub fn take_f64_list_or(
        &mut self,
        key: &str,
        default: &[f64],
    ) -> Result<Vec<f64>, ExperimentError> {
        match self.take_raw(key) {
            Some(raw) => {
                self.record(key, &raw);
                split_list(&raw).map(|item| parse_f64(key, item)).collect()
            }
            None => {
                self.record(
                    key,
                    default.iter().map(f64::to_string).collect::<Vec<_>>().join(", "),
                );
                Ok(default.to_vec())
            }
        }
    }

    /// Optional comma-separated list of unsigned integers.
    pub fn take_usize_list_or(
        &mut self,
        key: &str,
        default: &[usize],
    ) -> Result<Vec<usize>, ExperimentError> {
        match self.take_raw(key) {
            Some(raw) => {
                self.record(key, &raw);
                split_list(&raw)
                    .map(|item| {
                        item.parse::<usize>().map_err(|_| bad(key, item, "an unsigned integer"))
                    })
                    .collect()
            }
            None => {
                self.record(
                    key,
                    default.iter().map(usize::to_string).collect::<Vec<_>>().join(", "),
                );
                Ok(default.to_vec())
            }
        }
    }

    /// Comma-separated list of strings (for order lists like `1, 2, inf`).
    pub fn take_str_list_or(
        &mut self,
        key: &str,
        default: &str,
    ) -> Result<Vec<String>, ExperimentError> {
        let raw = match self.take_raw(key) {
            Some(raw) => raw,
            None => default.to_string(),
        };
        self.record(key, &raw);
        Ok(split_list(&raw).map(str::to_string).collect())
    }

    /// Rejects any key that no recipe step consumed.
    pub fn finish(&self) -> Result<(), ExperimentError> {
        let unknown: Vec<String> = self
            .entries
            .iter()
            .filter(|(_, e)| !e.consumed)
            .map(|(k, e)| format!("`{k}` (line {})", e.line))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::UnknownKeys(unknown))
        }
    }

    /// Every key the recipe used, with defaults substituted.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    /// Renders the resolved configuration as a reloadable config file.
    pub fn resolved_text(&self) -> String {
        let mut out = String::from("# resolved configuration (defaults included)\n");
        for (key, value) in &self.resolved {
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }
}

fn split_list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_f64(key: &str, raw: &str) -> Result<f64, ExperimentError> {
    raw.parse::<f64>()
        .map_err(|_| bad(key, raw, "a real number"))
        .and_then(|v| if v.is_finite() { Ok(v) } else { Err(bad(key, raw, "a finite real")) })
}

fn bad(key: &str, raw: &str, expected: &str) -> ExperimentError {
    ExperimentError::BadValue { key: key.into(), msg: format!("`{raw}` is not {expected}") }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_defaults_and_lists() {
        let text = "\n# header comment\nmu = 0.2   # trailing comment\nn_theta = 64\n\neps_ladder = 1e-3, 1e-4,1e-5\n";
        let mut cfg = RawConfig::from_str(text, "test").unwrap();
        assert_eq!(cfg.take_f64("mu").unwrap(), 0.2);
        assert_eq!(cfg.take_usize_or("n_theta", 32).unwrap(), 64);
        assert_eq!(cfg.take_f64_or("dt", 1e-3).unwrap(), 1e-3);
        assert_eq!(cfg.take_f64_list("eps_ladder").unwrap(), vec![1e-3, 1e-4, 1e-5]);
        cfg.finish().unwrap();
        let resolved = cfg.resolved_text();
        assert!(resolved.contains("mu = 0.2"));
        assert!(resolved.contains("dt = 0.001"), "{resolved}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = RawConfig::from_str("mu = 0.2\ntyop = 3\n", "test").unwrap();
        cfg.take_f64("mu").unwrap();
        let err = cfg.finish().unwrap_err();
        assert!(matches!(err, ExperimentError::UnknownKeys(ref keys) if keys[0].contains("tyop")));
    }

    #[test]
    fn missing_and_malformed_values_error() {
        let mut cfg = RawConfig::from_str("mu = abc\n", "test").unwrap();
        assert!(matches!(cfg.take_f64("mu"), Err(ExperimentError::BadValue { .. })));
        assert!(matches!(cfg.take_f64("nope"), Err(ExperimentError::MissingKey(_))));
        assert!(RawConfig::from_str("mu 0.2\n", "test").is_err());
        assert!(RawConfig::from_str("mu = 1\nmu = 2\n", "test").is_err());
        assert!(RawConfig::from_str("Bad-Key = 1\n", "test").is_err());
        assert!(matches!(
            RawConfig::from_str("mu = inf\n", "t").unwrap().take_f64("mu"),
            Err(ExperimentError::BadValue { .. })
        ));
    }

    #[test]
    fn hash_is_stable_and_text_sensitive() {
        let a = RawConfig::from_str("mu = 0.2\n", "t").unwrap();
        let b = RawConfig::from_str("mu = 0.2\n", "t").unwrap();
        let c = RawConfig::from_str("mu = 0.3\n", "t").unwrap();
        assert_eq!(a.sha256(), b.sha256());
        assert_ne!(a.sha256(), c.sha256());
        assert_eq!(a.sha256().len(), 64);
    }

    #[test]
    fn overrides_replace_values() {
        let mut cfg = RawConfig::from_str("seed = 1\n", "t").unwrap();
        cfg.override_key("seed", "99");
        assert_eq!(cfg.take_u64("seed").unwrap(), 99);
        cfg.finish().unwrap();
    }
}
