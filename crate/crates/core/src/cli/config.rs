//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the same
//! spelling as the long command-line flags (`eps`, `fn-eps`, `seed`, …);
//! a flag given on the command line always wins over the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| invalid(format!("config line {}: expected key = value", no + 1)))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(invalid(format!("config line {}: empty key", no + 1)));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| invalid(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }
}

/// Records the effective value of every setting a command used.
#[derive(Debug, Default)]
pub struct Resolver<'a> {
    config: Option<&'a Config>,
    snapshot: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    pub fn new(config: Option<&'a Config>) -> Self {
        Self { config, snapshot: BTreeMap::new() }
    }

    /// Flag, then config file, then `None`.
    pub fn opt<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.config {
                Some(c) => c.get(key)?,
                None => None,
            },
        };
        if let Some(v) = &v {
            self.snapshot.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    /// Flag, then config file, then `default`.
    pub fn or<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.snapshot.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Flag, then config file; missing is a usage error.
    pub fn require<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>, why: &str) -> Result<T> {
        self.opt(key, flag)?.ok_or_else(|| invalid(format!("missing required setting '{key}': {why}")))
    }

    pub fn snapshot(&self) -> &BTreeMap<String, String> {
        &self.snapshot
    }
}
