//! Line-oriented `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys and values are
//! trimmed. A key may repeat; how repeats are interpreted is up to the
//! consumer (for `exclude` they accumulate).

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Unreadable { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    /// 1-based line number in the source text.
    pub line: usize,
}

pub fn parse_kv(text: &str) -> Result<Vec<KvEntry>, ConfigError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line: idx + 1,
                text: raw.to_string(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Malformed {
                line: idx + 1,
                text: raw.to_string(),
            });
        }
        entries.push(KvEntry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line: idx + 1,
        });
    }
    Ok(entries)
}

pub(crate) fn read_kv_file(path: &Path) -> Result<Vec<KvEntry>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_kv(&text)
}

pub(crate) fn parse_bool(entry: &KvEntry) -> Result<bool, ConfigError> {
    match entry.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::InvalidValue {
            line: entry.line,
            key: entry.key.clone(),
            message: format!("expected a boolean, found {:?}", entry.value),
        }),
    }
}

/// Settings for discovering and analysing a project tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectConfig {
    /// Source file extension without the leading dot.
    pub extension: String,
    /// Globs relative to the project root. A file is skipped when a glob
    /// matches its path or any of its ancestor directories.
    pub exclude: Vec<String>,
    /// Optional table of builtin higher-order callables.
    pub builtins_file: Option<PathBuf>,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        ProjectConfig {
            extension: "py".to_string(),
            exclude: Vec::new(),
            builtins_file: None,
        }
    }
}

impl ProjectConfig {
    /// Relative `builtins_file` paths are resolved against `base`, normally
    /// the directory holding the config file.
    pub fn from_kv(entries: &[KvEntry], base: &Path) -> Result<Self, ConfigError> {
        let mut config = ProjectConfig::default();
        for entry in entries {
            match entry.key.as_str() {
                "extension" => {
                    let ext = entry.value.trim_start_matches('.');
                    if ext.is_empty() {
                        return Err(ConfigError::InvalidValue {
                            line: entry.line,
                            key: entry.key.clone(),
                            message: "extension must not be empty".into(),
                        });
                    }
                    config.extension = ext.to_string();
                }
                "exclude" => config.exclude.extend(
                    entry
                        .value
                        .split(',')
                        .map(str::trim)
                        .filter(|g| !g.is_empty())
                        .map(String::from),
                ),
                "builtins_file" => config.builtins_file = Some(base.join(&entry.value)),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: entry.line,
                        key: entry.key.clone(),
                    })
                }
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let entries = read_kv_file(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_kv(&entries, base)
    }
}
