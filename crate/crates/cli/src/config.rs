//! `key = value` settings merged from an optional file and command-line
//! flags, with typed lookups that name the offending key on failure.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Invalid or missing setting.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at '{}': {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses `key = value` lines. `#` starts a comment; keys may use `-` or
/// `_` interchangeably.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_error(&format!("line {}", n + 1), "expected key = value"))?;
        out.insert(normalize(k.trim()), v.trim().to_string());
    }
    Ok(out)
}

fn normalize(key: &str) -> String {
    key.replace('-', "_")
}

/// Resolved settings for one subcommand. Every value read, defaults
/// included, is remembered for the run metadata.
#[derive(Debug)]
pub struct Settings {
    values: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl Settings {
    /// File values overridden by flags. Keys outside `known` are rejected.
    pub fn merge(
        file: BTreeMap<String, String>,
        flags: Vec<(&'static str, Option<String>)>,
    ) -> Result<Settings, ConfigError> {
        let known: Vec<&str> = flags.iter().map(|f| f.0).collect();
        if let Some(k) = file.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(config_error(k, "unknown key for this command"));
        }
        let mut values = file;
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Settings {
            values,
            used: BTreeMap::new(),
        })
    }

    pub fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.used.insert(key.to_string(), v.clone());
        }
        v
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| config_error(key, format!("'{v}': {e}"))),
        }
    }

    pub fn or<T: FromStr + fmt::Display>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.used.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn req<T: FromStr>(&mut self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| config_error(key, "required"))
    }

    pub fn flag(&mut self, key: &str) -> Result<bool, ConfigError> {
        self.or(key, false)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&mut self, key: &str, default: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let v = self.raw(key).unwrap_or_else(|| {
            self.used.insert(key.to_string(), default.to_string());
            default.to_string()
        });
        v.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|e| config_error(key, format!("'{s}': {e}")))
            })
            .collect()
    }

    /// A pair `a,b`.
    pub fn pair(&mut self, key: &str, default: (f64, f64)) -> Result<(f64, f64), ConfigError> {
        let v: Vec<f64> = self.list(key, &format!("{},{}", default.0, default.1))?;
        match v[..] {
            [a, b] => Ok((a, b)),
            _ => Err(config_error(key, "expected two comma-separated numbers")),
        }
    }

    /// `key = value` lines for every setting read, sorted by key.
    pub fn echo(&self) -> String {
        self.used.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Git-style content hash: SHA-256 of `blob <len>\0` followed by the bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}
