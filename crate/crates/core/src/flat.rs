//! Flat `key = value` config files with unit-suffixed keys.
//!
//! The syntax is TOML restricted to top-level scalars, so files stay
//! human-editable and parse errors come with line numbers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use toml::Value;

use crate::error::{Error, Result};

/// A parsed flat config with enough source context for line-level errors.
#[derive(Clone, Debug)]
pub struct FlatConfig {
    path: PathBuf,
    values: BTreeMap<String, Value>,
    lines: BTreeMap<String, usize>,
}

/// Scalar values as they appear in the canonical (hashed) form.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl FlatConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            Error::ConfigLine {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })?;
        let mut lines = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            if let Some((k, _)) = raw.split_once('=') {
                let k = k.trim().trim_matches('"');
                lines.entry(k.to_string()).or_insert(i + 1);
            }
        }
        let mut values = BTreeMap::new();
        for (k, v) in table {
            if matches!(v, Value::Table(_) | Value::Array(_)) {
                return Err(Error::ConfigLine {
                    path: path.to_path_buf(),
                    line: lines.get(&k).copied().unwrap_or(0),
                    message: format!("`{k}` must be a scalar; sections and arrays are not allowed"),
                });
            }
            values.insert(k, v);
        }
        Ok(Self {
            path: path.to_path_buf(),
            values,
            lines,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.lines.get(key).copied().unwrap_or(0)
    }

    pub fn line_error(&self, key: &str, message: impl Into<String>) -> Error {
        Error::ConfigLine {
            path: self.path.clone(),
            line: self.line_of(key),
            message: message.into(),
        }
    }

    fn missing(&self, key: &str) -> Error {
        Error::MissingKey {
            path: self.path.clone(),
            key: key.to_string(),
        }
    }

    /// Rejects keys outside `allowed`.
    pub fn check_known(&self, allowed: &[&str]) -> Result<()> {
        for k in self.values.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(self.line_error(k, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.line_error(key, format!("`{key}` must be a number"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.line_error(key, format!("`{key}` must be a non-negative integer"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.get_usize(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.line_error(key, format!("`{key}` must be true or false"))),
        }
    }

    pub fn get_str(&self, key: &str) -> Result<Option<&str>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(self.line_error(key, format!("`{key}` must be a string"))),
        }
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.get_str(key)?.ok_or_else(|| self.missing(key))
    }

    /// Sorted scalar map, the basis of config hashing.
    pub fn canonical(&self) -> BTreeMap<String, Scalar> {
        self.values
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::Float(x) => Scalar::Float(*x),
                    Value::Integer(i) => Scalar::Int(*i),
                    Value::Boolean(b) => Scalar::Bool(*b),
                    other => Scalar::Text(other.as_str().unwrap_or_default().to_string()),
                };
                (k.clone(), s)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FlatConfig> {
        FlatConfig::parse(Path::new("test.toml"), text)
    }

    #[test]
    fn reads_scalars() {
        let c = parse("# comment\nkappa_per_us = 5\nchi_MHz = -0.47\nname = \"x\"\n").unwrap();
        assert_eq!(c.f64("kappa_per_us").unwrap(), 5.0);
        assert_eq!(c.f64("chi_MHz").unwrap(), -0.47);
        assert_eq!(c.str("name").unwrap(), "x");
        assert_eq!(c.line_of("chi_MHz"), 3);
    }

    #[test]
    fn missing_key_names_the_key() {
        let c = parse("a = 1\n").unwrap();
        match c.f64("C_ac_fF") {
            Err(Error::MissingKey { key, .. }) => assert_eq!(key, "C_ac_fF"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        match parse("a = 1\nb = \n") {
            Err(Error::ConfigLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_sections_and_unknown_keys() {
        assert!(parse("[x]\na = 1\n").is_err());
        let c = parse("a = 1\nb = 2\n").unwrap();
        match c.check_known(&["a"]) {
            Err(Error::ConfigLine { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains('b'));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_errors() {
        let c = parse("a = \"s\"\nn = -1\n").unwrap();
        assert!(c.f64("a").is_err());
        assert!(c.usize("n").is_err());
    }
}
