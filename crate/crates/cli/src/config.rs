//! Optional TOML defaults for `run` and `diff`. Flags win over the file.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lang: Option<String>,
    pub fuel: Option<u64>,
    pub sched: Option<String>,
    pub trace: Option<PathBuf>,
    pub no_typecheck: Option<bool>,
    pub mode: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys() {
        let c: FileConfig = toml::from_str("lang = \"delim\"\nfuel = 50\nsched = \"rand:3\"\nno_typecheck = true\n").unwrap();
        assert_eq!(c.lang.as_deref(), Some("delim"));
        assert_eq!(c.fuel, Some(50));
        assert_eq!(c.no_typecheck, Some(true));
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    }
}
