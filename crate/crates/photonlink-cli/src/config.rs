//! Flat key=value config files.
//!
//! One `key = value` pair per line; keys match the long flag names of the
//! selected subcommand. Blank lines and `#` comments are ignored. Flags
//! override file values, which override built-in defaults.

use std::collections::HashMap;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::io(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::invalid(format!(
                    "{}:{}: expected key = value, got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// flag > file > default.
    pub fn resolve<T: Clone, F>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: F,
        default: Option<T>,
    ) -> Result<T, CliError>
    where
        F: FnOnce(&str) -> Result<T, CliError>,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.get(key) {
            return parse(raw);
        }
        default.ok_or_else(|| CliError::invalid(format!("missing required option --{key}")))
    }
}
