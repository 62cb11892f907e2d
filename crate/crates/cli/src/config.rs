//! Flat `key = value` settings file. `#` starts a comment; blank lines are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use glyph_core::features::Family;

pub const KEYS: [&str; 14] = [
    "seed",
    "epochs",
    "learning_rate",
    "momentum",
    "target_sse",
    "protocol",
    "holdout_fraction",
    "mode",
    "top",
    "skip_unreadable",
    "hidden.chain-code",
    "hidden.intersection",
    "hidden.shadow",
    "hidden.line-fit",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(format!("config line {}: unknown key {key:?}", n + 1));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        ConfigFile::parse(&text)
    }

    /// Typed lookup; a present but malformed value is an error.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("config key {key}: {e}")))
            .transpose()
    }

    pub fn hidden_key(family: Family) -> String {
        format!("hidden.{}", family.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let c =
            ConfigFile::parse("# settings\nseed = 7\n\nmode=vote # inline\nhidden.shadow = 12\n")
                .unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(c.get::<String>("mode").unwrap().as_deref(), Some("vote"));
        assert_eq!(
            c.get::<usize>(&ConfigFile::hidden_key(Family::Shadow))
                .unwrap(),
            Some(12)
        );
        assert_eq!(c.get::<u64>("epochs").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("seed").is_err());
        assert!(ConfigFile::parse("seed = x")
            .unwrap()
            .get::<u64>("seed")
            .is_err());
    }
}
