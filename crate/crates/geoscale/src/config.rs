//! `key = value` configuration, one entry per line, `#` starts a comment.
//! Keys are the long flag names without dashes (`head-limit = 0.4`).
//! Flags given on the command line take precedence.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("config line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("config key '{key}': bad value '{value}'")]
    Value { key: String, value: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1 });
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate { line: i + 1, key });
            }
        }
        Ok(Config { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// `flag` if set, else the parsed config entry for `key`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, ConfigError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::Value { key: key.to_string(), value: v.to_string() }),
        }
    }

    /// Like [`Config::pick`] with a fallback default.
    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// For boolean switches: set on the command line, or `true`/`false` in
    /// the config.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, ConfigError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let c = Config::parse("# defaults\nhead-limit = 0.3\nangle=30 # degrees\n\nborder-numbers = true\n").unwrap();
        assert_eq!(c.pick::<f64>(None, "head-limit").unwrap(), Some(0.3));
        assert_eq!(c.pick(Some(0.5), "head-limit").unwrap(), Some(0.5));
        assert_eq!(c.pick_or::<f64>(None, "missing", 2.0).unwrap(), 2.0);
        assert_eq!(c.pick::<f64>(None, "angle").unwrap(), Some(30.0));
        assert!(c.switch(false, "border-numbers").unwrap());
    }

    #[test]
    fn errors() {
        assert_eq!(Config::parse("a=1\nnonsense\n"), Err(ConfigError::Syntax { line: 2 }));
        assert!(matches!(Config::parse("a=1\na=2\n"), Err(ConfigError::Duplicate { line: 2, .. })));
        let c = Config::parse("angle = steep").unwrap();
        assert!(matches!(c.pick::<f64>(None, "angle"), Err(ConfigError::Value { .. })));
    }
}
