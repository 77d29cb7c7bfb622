//! Key=value config files. Flags override config entries, which override
//! built-in defaults.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let mut entries = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Input(format!(
                        "config {}:{}: expected key=value",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                entries.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Config { entries })
    }

    /// Resolves one setting: explicit flag, then config entry, then default.
    pub fn resolve<T: FromStr + Copy>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.entries.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| CliError::Input(format!("config key {key}: {e}"))),
            None => Ok(default),
        }
    }
}
